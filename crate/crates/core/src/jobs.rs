//! Reproducible jobs behind the command-line front end.
//!
//! A job is a command plus a `key=value` configuration. Every command has a
//! fixed key table with defaults; unknown keys are rejected. Each run writes
//! its outputs and a `manifest.txt` that echoes the resolved configuration.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::builder::{build_family, rca_threshold_db, search_starting_protograph};
use crate::error::{Error, Result};
use crate::exit::{monte_carlo_curve, structured_exit_curve_with, uniform_grid, StructuredComponent};
use crate::infotheory::{ChannelParam, DegreeDistribution};
use crate::lift::{lift_with, LiftOptions};
use crate::optimizer::{
    design_at_rate, joint_optimize, lambda_csv, threshold_report, CheckProfile, DesignOptions, JointDesignSpec,
    SemiStructuredSpec, StructureTemplate,
};
use crate::proto_de::{family_threshold_report, rca_threshold, DeOptions};
use crate::protograph::{protograph_one, starting_protograph, Protograph};
use crate::report::{threshold_csv, ThresholdRow};
use crate::sim::{simulate, SimOptions, StopRule};
use crate::structure::{build_h2_base, protograph_mask_for_rate, protograph_rates, sr_classify, Rate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    ExitCurve,
    Design,
    DesignJoint,
    Predict,
    ProtoSearch,
    ProtoFamily,
    Lift,
    Simulate,
    SrClassify,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::ExitCurve,
        Command::Design,
        Command::DesignJoint,
        Command::Predict,
        Command::ProtoSearch,
        Command::ProtoFamily,
        Command::Lift,
        Command::Simulate,
        Command::SrClassify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::ExitCurve => "exit-curve",
            Command::Design => "design",
            Command::DesignJoint => "design-joint",
            Command::Predict => "predict",
            Command::ProtoSearch => "proto-search",
            Command::ProtoFamily => "proto-family",
            Command::Lift => "lift",
            Command::Simulate => "simulate",
            Command::SrClassify => "sr-classify",
        }
    }

    /// `(key, default)`; an empty default means "not set".
    pub fn keys(self) -> &'static [(&'static str, &'static str)] {
        const DESIGN_COMMON: [(&str, &str); 6] =
            [("m", "32"), ("checks", "8"), ("d_v_max", "20"), ("min_degree", "3"), ("grid", "10000"), ("tunnel_top", "0.97")];
        match self {
            Command::ExitCurve => &[
                ("structure", "e2rc"),
                ("m", "128"),
                ("check_degree", "8"),
                ("sigma2", "0.95775"),
                ("points", "10000"),
                ("chunk", "250"),
                ("mc_samples", "0"),
                ("mc_points", "101"),
            ],
            Command::Design => {
                const K: [(&str, &str); 8] = [
                    DESIGN_COMMON[0],
                    DESIGN_COMMON[1],
                    DESIGN_COMMON[2],
                    DESIGN_COMMON[3],
                    DESIGN_COMMON[4],
                    DESIGN_COMMON[5],
                    ("rate", "1/2"),
                    ("report_rates", ""),
                ];
                &K
            }
            Command::DesignJoint => {
                const K: [(&str, &str); 10] = [
                    DESIGN_COMMON[0],
                    DESIGN_COMMON[1],
                    DESIGN_COMMON[2],
                    DESIGN_COMMON[3],
                    DESIGN_COMMON[4],
                    DESIGN_COMMON[5],
                    ("rates", "8/16,8/14,8/12,8/10,8/9"),
                    ("g_min", "0"),
                    ("g_max", "1"),
                    ("g_step", "0.01"),
                ];
                &K
            }
            Command::Predict => &[
                ("lambda", ""),
                ("protograph", ""),
                ("rates", ""),
                ("m", "32"),
                ("checks", "8"),
                ("grid", "10000"),
                ("tunnel_top", "0.97"),
                ("resolution_db", "1e-4"),
            ],
            Command::ProtoSearch => &[
                ("m0", "1"),
                ("n0", "9"),
                ("d_v_max", "20"),
                ("min_degree", "3"),
                ("keep", "5"),
                ("resolution_db", "1e-3"),
            ],
            Command::ProtoFamily => &[("start", "start"), ("stages", "3"), ("budget", "128"), ("resolution_db", "1e-3")],
            Command::Lift => &[("protograph", "protograph-1"), ("q", "256"), ("retries", "20"), ("allow_four_cycles", "false"), ("cycle_search", "6")],
            Command::Simulate => &[
                ("protograph", "protograph-1"),
                ("q", "256"),
                ("rates", "8/16,8/12,8/9"),
                ("ebn0", "0.5:2.0:0.25"),
                ("ebn0_mode", "absolute"),
                ("min_frame_errors", "100"),
                ("max_frames", "10000000"),
                ("max_iters", "100"),
                ("target_ber", "1e-4"),
            ],
            Command::SrClassify => &[("protograph", "protograph-1"), ("m", "0")],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key=value, got `{line}`") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Resolved configuration of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl JobConfig {
    /// Defaults, then `file` entries, then `overrides`, later wins.
    pub fn resolve(command: Command, file: &[(String, String)], overrides: &[(String, String)]) -> Result<Self> {
        let table = command.keys();
        let mut values: BTreeMap<String, String> = table.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in file.iter().chain(overrides) {
            if !table.iter().any(|(t, _)| t == k) {
                let known: Vec<&str> = table.iter().map(|e| e.0).collect();
                return Err(Error::Config(format!("unknown key `{k}` for {command}; known keys: {}", known.join(", "))));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(JobConfig { command, values })
    }

    pub fn from_text(command: Command, text: &str) -> Result<Self> {
        JobConfig::resolve(command, &parse_key_values(text)?, &[])
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("key comes from the command table")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e| Error::Config(format!("{key} = `{v}`: {e}")))
    }

    pub fn rates(&self, key: &str) -> Result<Vec<Rate>> {
        list(self.raw(key)).iter().map(|s| s.parse().map_err(|e| Error::Config(format!("{key}: {e}")))).collect()
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// `d:w,d:w,...`
pub fn parse_distribution(v: &str) -> Result<DegreeDistribution> {
    let entries = list(v)
        .iter()
        .map(|e| {
            let (d, w) = e.split_once(':').ok_or_else(|| Error::Config(format!("expected degree:weight, got `{e}`")))?;
            let d = d.trim().parse::<usize>().map_err(|x| Error::Config(format!("{e}: {x}")))?;
            let w = w.trim().parse::<f64>().map_err(|x| Error::Config(format!("{e}: {x}")))?;
            Ok((d, w))
        })
        .collect::<Result<Vec<_>>>()?;
    DegreeDistribution::new(entries)
}

/// A single integer is a concentrated profile, otherwise `d:w,...`.
pub fn parse_checks(v: &str) -> Result<CheckProfile> {
    match v.trim().parse::<u32>() {
        Ok(d) => Ok(CheckProfile::Concentrated(d)),
        Err(_) => Ok(CheckProfile::Distribution(parse_distribution(v)?)),
    }
}

/// `a,b,c` or `start:stop:step` (inclusive).
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() == 3 {
        let p = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("{v}: {e}")));
        let (a, b, s) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
        if !(s > 0.0) || b < a {
            return Err(Error::Config(format!("bad range `{v}`")));
        }
        let n = ((b - a) / s + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| a + k as f64 * s).collect());
    }
    list(v).iter().map(|s| s.parse().map_err(|e| Error::Config(format!("{v}: {e}")))).collect()
}

/// Built-in name (`protograph-1`, `start`) or a path to a protograph file.
pub fn load_protograph(v: &str) -> Result<Protograph> {
    match v {
        "protograph-1" => Ok(protograph_one()),
        "start" => Ok(starting_protograph()),
        path => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            Protograph::from_text(&text)
        }
    }
}

/// Global run settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunContext {
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
}

/// Files written by a job, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JobOutput {
    pub files: Vec<String>,
    /// Short human-readable result lines.
    pub summary: Vec<String>,
}

impl JobOutput {
    fn write(&mut self, dir: &Path, name: &str, content: &str) -> Result<()> {
        fs::write(dir.join(name), content).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Runs one job and writes its manifest.
pub fn run_job(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    fs::create_dir_all(&ctx.out).map_err(|e| Error::Io(format!("{}: {e}", ctx.out.display())))?;
    let t = Instant::now();
    let mut out = match cfg.command {
        Command::ExitCurve => exit_curve(cfg, ctx),
        Command::Design => design(cfg, ctx),
        Command::DesignJoint => design_joint(cfg, ctx),
        Command::Predict => predict(cfg, ctx),
        Command::ProtoSearch => proto_search(cfg, ctx),
        Command::ProtoFamily => proto_family(cfg, ctx),
        Command::Lift => lift_job(cfg, ctx),
        Command::Simulate => simulate_job(cfg, ctx),
        Command::SrClassify => sr_job(cfg, ctx),
    }?;
    if !out.summary.is_empty() {
        let text: String = out.summary.iter().map(|l| format!("{l}\n")).collect();
        out.write(&ctx.out, "summary.txt", &text)?;
    }
    let mut m = String::new();
    let _ = writeln!(m, "command = {}", cfg.command);
    let _ = writeln!(m, "seed = {}", ctx.seed);
    let _ = writeln!(m, "threads = {}", ctx.threads);
    let _ = writeln!(m, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "elapsed_s = {:.3}", t.elapsed().as_secs_f64());
    let _ = writeln!(m, "\n[config]");
    m.push_str(&cfg.to_text());
    let _ = writeln!(m, "\n[outputs]");
    for f in &out.files {
        let _ = writeln!(m, "{f}");
    }
    fs::write(ctx.out.join("manifest.txt"), m)?;
    out.files.push("manifest.txt".into());
    Ok(out)
}

fn template(cfg: &JobConfig) -> Result<StructureTemplate> {
    Ok(StructureTemplate::new(cfg.get("m")?, parse_checks(cfg.raw("checks"))?))
}

fn design_options(cfg: &JobConfig) -> Result<DesignOptions> {
    let mut o = DesignOptions { grid: cfg.get("grid")?, tunnel_top: cfg.get("tunnel_top")?, ..Default::default() };
    if let Some(&(_, _)) = cfg.command.keys().iter().find(|e| e.0 == "min_degree") {
        o.min_degree = cfg.get("min_degree")?;
    }
    Ok(o)
}

fn max_gap(rows: &[ThresholdRow]) -> f64 {
    rows.iter().map(|r| r.gap_db).fold(f64::NEG_INFINITY, f64::max)
}

fn exit_curve(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let chan = ChannelParam::new(cfg.get("sigma2")?)?;
    let (m, dc): (usize, u32) = (cfg.get("m")?, cfg.get("check_degree")?);
    let comp = match cfg.raw("structure") {
        "e2rc" => StructuredComponent::e2rc(m, dc, chan)?,
        "ira" => StructuredComponent::ira_chain(m, dc, chan)?,
        s => return Err(Error::Config(format!("structure must be e2rc or ira, got `{s}`"))),
    };
    let points: usize = cfg.get("points")?;
    let t = Instant::now();
    let curve = structured_exit_curve_with(&comp, points, crate::exit::EPS_THRESH, cfg.get("chunk")?)?;
    let fast_s = t.elapsed().as_secs_f64();
    let mut out = JobOutput::default();
    out.write(&ctx.out, "exit_curve.csv", &curve.to_csv())?;
    out.summary.push(format!("points = {}", curve.len()));
    out.summary.push(format!("fast_seconds = {fast_s:.3}"));
    let samples: usize = cfg.get("mc_samples")?;
    if samples > 0 {
        let grid = uniform_grid(cfg.get("mc_points")?);
        let mc = monte_carlo_curve(&comp, &grid, samples, ctx.seed)?;
        let mut csv = String::from("i_a,fast,mc\n");
        let mut mae = 0.0;
        for &(x, y) in mc.points() {
            let f = curve.eval(x);
            mae += (f - y).abs();
            let _ = writeln!(csv, "{x:.6},{f:.6},{y:.6}");
        }
        mae /= mc.len() as f64;
        out.write(&ctx.out, "mc_compare.csv", &csv)?;
        out.summary.push(format!("mae = {mae:.6}"));
    }
    Ok(out)
}

fn write_design(out: &mut JobOutput, ctx: &RunContext, spec: &SemiStructuredSpec, rows: &[ThresholdRow]) -> Result<()> {
    out.write(&ctx.out, "lambda.csv", &lambda_csv(&spec.lambda))?;
    out.write(&ctx.out, "thresholds.csv", &threshold_csv(rows))?;
    out.summary.push(format!("max_gap_db = {:.4}", max_gap(rows)));
    Ok(())
}

fn single_design(cfg: &JobConfig, ctx: &RunContext, target: Rate, report: Vec<Rate>) -> Result<JobOutput> {
    let tpl = template(cfg)?;
    let opts = design_options(cfg)?;
    let d = design_at_rate(target.value(), &tpl, cfg.get("d_v_max")?, &opts)?;
    let report = if report.is_empty() { vec![tpl.mother_rate()?] } else { report };
    let rows = threshold_report(&d.spec, &report, &opts)?;
    let mut out = JobOutput::default();
    write_design(&mut out, ctx, &d.spec, &rows)?;
    out.summary.push(format!("design_gap_db = {:.4}", d.gap_db));
    out.summary.push(format!("design_rate = {:.6}", d.rate));
    Ok(out)
}

fn design(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    single_design(cfg, ctx, cfg.get("rate")?, cfg.rates("report_rates")?)
}

fn design_joint(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let rates = cfg.rates("rates")?;
    if rates.len() == 1 {
        // A one-rate joint design is the single-rate design.
        return single_design(cfg, ctx, rates[0], vec![]);
    }
    let tpl = template(cfg)?;
    let opts = design_options(cfg)?;
    let js = JointDesignSpec { rates: rates.clone(), g_min: cfg.get("g_min")?, g_max: cfg.get("g_max")?, g_step: cfg.get("g_step")? };
    let jd = joint_optimize(&js, &tpl, cfg.get("d_v_max")?, &opts).map_err(|e| match e {
        Error::Infeasible(m) => Error::Infeasible(format!("rates {}: {m}", cfg.raw("rates"))),
        e => e,
    })?;
    let rows = threshold_report(&jd.spec, &rates, &opts)?;
    let mut out = JobOutput::default();
    write_design(&mut out, ctx, &jd.spec, &rows)?;
    out.summary.push(format!("g_db = {:.4}", jd.g));
    out.summary.push(format!("design_rate = {:.6}", jd.rate));
    Ok(out)
}

fn predict(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let rows = if cfg.is_set("protograph") {
        if cfg.is_set("lambda") {
            return Err(Error::Config("set either lambda or protograph, not both".into()));
        }
        let g = load_protograph(cfg.raw("protograph"))?;
        let rates = if cfg.is_set("rates") { cfg.rates("rates")? } else { protograph_rates(&g) };
        let de = DeOptions { resolution_db: cfg.get("resolution_db")?, ..Default::default() };
        let members = rates
            .iter()
            .map(|&r| Ok((g.clone(), protograph_mask_for_rate(&g, r)?)))
            .collect::<Result<Vec<_>>>()?;
        family_threshold_report(&members, &de)?
    } else if cfg.is_set("lambda") {
        let tpl = template(cfg)?;
        let spec = SemiStructuredSpec::new(tpl.clone(), parse_distribution(cfg.raw("lambda"))?);
        let rates = if cfg.is_set("rates") { cfg.rates("rates")? } else { vec![tpl.mother_rate()?] };
        threshold_report(&spec, &rates, &design_options(cfg)?)?
    } else {
        return Err(Error::Config("predict needs lambda or protograph".into()));
    };
    out.write(&ctx.out, "thresholds.csv", &threshold_csv(&rows))?;
    out.summary.push(format!("max_gap_db = {:.4}", max_gap(&rows)));
    Ok(out)
}

fn proto_search(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let de = DeOptions { resolution_db: cfg.get("resolution_db")?, ..Default::default() };
    let (m0, n0): (usize, usize) = (cfg.get("m0")?, cfg.get("n0")?);
    let s = search_starting_protograph(m0, n0, cfg.get("d_v_max")?, cfg.get("min_degree")?, cfg.get("keep")?, &de)?;
    let mut csv = String::from("rank,degrees,ebn0_db,gap_db\n");
    for (i, (d, t)) in s.ranking.iter().enumerate() {
        let degs: Vec<String> = d.iter().map(u32::to_string).collect();
        let _ = writeln!(csv, "{},{},{:.4},{:.4}", i + 1, degs.join(" "), t.ebn0_db, t.gap_db);
    }
    let mut out = JobOutput::default();
    out.write(&ctx.out, "ranking.csv", &csv)?;
    out.write(&ctx.out, "start.proto", &s.best()?.to_text())?;
    out.summary.push(format!("space = {}", s.space_size));
    out.summary.push(format!("survivors = {}", s.survivors));
    Ok(out)
}

fn proto_family(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let start = load_protograph(cfg.raw("start"))?;
    let de = DeOptions { resolution_db: cfg.get("resolution_db")?, ..Default::default() };
    let f = build_family(&start, cfg.get("stages")?, cfg.get("budget")?, &rca_threshold_db(de))?;
    let rows = family_threshold_report(&f.masked_members()?, &de)?;
    let mut out = JobOutput::default();
    out.write(&ctx.out, "mother.proto", &f.mother().to_text())?;
    out.write(&ctx.out, "stage_log.txt", &f.stage_log_text())?;
    out.write(&ctx.out, "thresholds.csv", &threshold_csv(&rows))?;
    out.summary.push(format!("members = {}", f.len()));
    if f.mother().vars_with_role(crate::protograph::VarRole::ParityNew).is_empty() {
        out.summary.push("census = none".into());
    } else {
        out.summary.push(format!("census = {:?}", sr_classify(f.mother())?.census()));
    }
    Ok(out)
}

fn lift_job(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let g = load_protograph(cfg.raw("protograph"))?;
    let opts = LiftOptions { retries: cfg.get("retries")?, allow_four_cycles: cfg.get("allow_four_cycles")?, cycle_search: cfg.get("cycle_search")? };
    let code = lift_with(&g, cfg.get("q")?, ctx.seed, &opts)?;
    let mut out = JobOutput::default();
    out.write(&ctx.out, "h.alist", &code.h().to_alist())?;
    out.write(&ctx.out, "shifts.txt", &code.shift_table())?;
    out.summary.push(format!("n = {}", code.n()));
    out.summary.push(format!("k = {}", code.k()));
    out.summary.push(format!("girth = {}", code.girth().map_or("inf".into(), |g| g.to_string())));
    if let Some(p) = code.encoder_plan() {
        out.summary.push(format!("encoder_gap = {}", p.gap()));
    }
    Ok(out)
}

fn simulate_job(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let g = load_protograph(cfg.raw("protograph"))?;
    let code = lift_with(&g, cfg.get("q")?, ctx.seed, &LiftOptions::default())?;
    let mut rates = cfg.rates("rates")?;
    // Lowest rate first keeps the masks nested.
    rates.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let grid = parse_grid(cfg.raw("ebn0"))?;
    let relative = match cfg.raw("ebn0_mode") {
        "absolute" => false,
        "above_threshold" => true,
        s => return Err(Error::Config(format!("ebn0_mode must be absolute or above_threshold, got `{s}`"))),
    };
    let opts = SimOptions {
        stop: StopRule { min_frame_errors: cfg.get("min_frame_errors")?, max_frames: cfg.get("max_frames")? },
        max_iters: cfg.get("max_iters")?,
        ..Default::default()
    };
    let target: f64 = cfg.get("target_ber")?;
    let mut out = JobOutput::default();
    for r in rates {
        let mask = protograph_mask_for_rate(&g, r)?;
        let points: Vec<f64> = if relative {
            let t = rca_threshold(&g.with_punctured(mask.clone())?, &DeOptions { resolution_db: 1e-3, ..Default::default() })?
                .ok_or_else(|| Error::DesignFailed(format!("no DE threshold at rate {r}")))?;
            grid.iter().map(|x| t.ebn0_db + x).collect()
        } else {
            grid.clone()
        };
        let res = simulate(&code, &[mask], &points, &opts, ctx.seed)?.remove(0);
        let name = format!("sim_{}_{}.csv", r.num, r.den);
        out.write(&ctx.out, &name, &res.to_csv())?;
        let thr = res.measured_threshold(target).map_or("not reached".into(), |x| format!("{x:.4}"));
        out.summary.push(format!("measured_threshold {r} = {thr}"));
    }
    Ok(out)
}

fn sr_job(cfg: &JobConfig, ctx: &RunContext) -> Result<JobOutput> {
    let m: usize = cfg.get("m")?;
    let g = if m > 0 { build_h2_base(m)? } else { load_protograph(cfg.raw("protograph"))? };
    let p = sr_classify(&g)?;
    let mut csv = String::from("var,level\n");
    for &(v, l) in p.levels() {
        let _ = writeln!(csv, "{v},{}", l.map_or("none".into(), |l| l.to_string()));
    }
    let mut out = JobOutput::default();
    out.write(&ctx.out, "sr.csv", &csv)?;
    for (l, n) in p.census() {
        out.summary.push(format!("{l}-SR = {n}"));
    }
    Ok(out)
}
