//! Degree-distribution design for semi-structured E2RC codes.
//!
//! The code is split into the structured part (an H2 base whose checks also
//! carry left sockets) and the unstructured systematic nodes V1. For a fixed
//! channel the structured EXIT curve is tabulated, inverted, and the V1 degree
//! distribution is chosen by a linear program that keeps the EXIT tunnel
//! open while maximizing the rate.

use std::fmt;

use crate::error::{Error, Result};
use crate::exit::{structured_exit_curve, ExitCurve, StructuredComponent};
use crate::infotheory::{
    info_from_reliability, reliability, shannon_ebn0_db, ChannelParam, DegreeDistribution,
};
use crate::lp::{Cmp, LinearProgram};
use crate::report::ThresholdRow;
use crate::structure::{build_h2_base, puncture_mask_for_rate, Rate};

/// Highest structured a-priori MI at which the tunnel is required to be open.
///
/// With a degree-1 parity node in H2 the structured curve never reaches 1,
/// so the chart always closes just below the top; the region above this
/// value is the intrinsic floor and is left unconstrained.
pub const TUNNEL_TOP: f64 = 0.97;
/// Slack that realizes the strict tunnel inequality in the LP.
pub const LP_MARGIN: f64 = 1e-5;
pub const DEFAULT_GRID: usize = 10_000;

/// Total check degrees of the structured part.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckProfile {
    Concentrated(u32),
    /// Edge-perspective ρ, applied per check in node proportion.
    Distribution(DegreeDistribution),
}

impl fmt::Display for CheckProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckProfile::Concentrated(d) => write!(f, "{d}"),
            CheckProfile::Distribution(rho) => {
                let parts: Vec<String> = rho.entries().iter().map(|(d, w)| format!("{d}:{w}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Shape of the structured part: H2 base size, check profile and the number
/// of systematic nodes per base copy used to name punctured rates.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTemplate {
    pub m: usize,
    pub checks: CheckProfile,
    pub k_sys: usize,
}

impl StructureTemplate {
    pub fn new(m: usize, checks: CheckProfile) -> Self {
        StructureTemplate { m, checks, k_sys: m }
    }

    pub fn component(&self, chan: ChannelParam) -> Result<StructuredComponent> {
        let h2 = build_h2_base(self.m)?;
        match &self.checks {
            CheckProfile::Concentrated(dc) => StructuredComponent::with_total_degree(h2, *dc, chan),
            CheckProfile::Distribution(rho) => StructuredComponent::with_check_distribution(h2, rho, chan),
        }
    }

    /// Component with the designed puncturing pattern for `rate`.
    pub fn component_at(&self, chan: ChannelParam, rate: Rate) -> Result<StructuredComponent> {
        let mask = puncture_mask_for_rate(self.m, self.k_sys, rate)?;
        self.component(chan)?.with_punctured(mask)
    }

    /// Rate of the unpunctured code.
    pub fn mother_rate(&self) -> Result<Rate> {
        let (k, n) = (self.k_sys as u64, (self.k_sys + self.m) as u64);
        let g = gcd(k, n);
        Rate::new(k / g, n / g)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiStructuredSpec {
    pub structure: StructureTemplate,
    pub lambda: DegreeDistribution,
    pub d_v_max: usize,
}

impl SemiStructuredSpec {
    pub fn new(structure: StructureTemplate, lambda: DegreeDistribution) -> Self {
        let d_v_max = lambda.max_degree();
        SemiStructuredSpec { structure, lambda, d_v_max }
    }
}

/// Design rate of a semi-structured code.
///
/// Per copy of the H2 base there are `m` checks and `m` parity nodes, and
/// `E_L` edges enter the interleaver from the checks. The same edges leave
/// the systematic nodes, so there are `K = E_L · Σ λ_d/d` of them and the
/// rate is `K / (K + m)`.
pub fn rate_of(spec: &SemiStructuredSpec) -> Result<f64> {
    if spec.lambda.max_degree() > spec.d_v_max {
        return Err(Error::Invalid(format!(
            "λ uses degree {} above d_v_max {}",
            spec.lambda.max_degree(),
            spec.d_v_max
        )));
    }
    let comp = spec.structure.component(ChannelParam::new(1.0)?)?;
    let e_l = comp.left_edge_count();
    let k = e_l * spec.lambda.nodes_per_edge();
    let m = spec.structure.m as f64;
    if !(k > 0.0) {
        return Err(Error::Invalid("no systematic nodes".into()));
    }
    Ok(k / (k + m))
}

/// Dips smaller than this are solver noise and are treated as flat.
const MONOTONE_SLACK: f64 = 1e-6;

/// Inverse of a nondecreasing curve by swapping axes. Runs of equal `I_E`
/// keep their leftmost `I_A`.
pub fn invert_curve(curve: &ExitCurve) -> Result<ExitCurve> {
    if curve.points().windows(2).any(|w| w[1].1 < w[0].1 - MONOTONE_SLACK) {
        return Err(Error::Invalid("cannot invert a decreasing EXIT curve".into()));
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(curve.len());
    for &(x, y) in curve.points() {
        match pts.last() {
            Some(&(py, _)) if y <= py => {}
            _ => pts.push((y, x)),
        }
    }
    if pts.len() < 2 {
        return Err(Error::Invalid("EXIT curve is constant".into()));
    }
    ExitCurve::new(pts)
}

/// Knobs shared by the design routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Points in the structured curve and in the tunnel grid.
    pub grid: usize,
    pub margin: f64,
    pub tunnel_top: f64,
    /// Smallest V1 degree offered to the LP.
    pub min_degree: usize,
    /// Eb/N0 step of the channel sweeps (dB).
    pub step_db: f64,
    /// Largest gap to capacity tried before giving up (dB).
    pub max_gap_db: f64,
    /// Bisection resolution in σ_n².
    pub sigma2_resolution: f64,
    /// Mother-rate acceptance slack for joint designs.
    pub rate_slack: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            grid: DEFAULT_GRID,
            margin: LP_MARGIN,
            tunnel_top: TUNNEL_TOP,
            min_degree: 3,
            step_db: 0.01,
            max_gap_db: 2.0,
            sigma2_resolution: 1e-4,
            rate_slack: 0.005,
        }
    }
}

/// Tunnel constraints of one channel: V1 must output more than `target` at
/// a-priori `x`. `chan_var` is the V1 channel-message variance.
#[derive(Debug, Clone)]
pub struct TunnelRows {
    pub chan_var: f64,
    pub rows: Vec<(f64, f64)>,
}

impl TunnelRows {
    /// Rows `x = k/grid` up to the point where the structured a-priori
    /// reaches `tunnel_top`, with targets read from the inverted curve.
    pub fn from_structured(forward: &ExitCurve, chan: ChannelParam, grid: usize, tunnel_top: f64) -> Result<Self> {
        let inv = invert_curve(forward)?;
        let x_top = forward.eval(tunnel_top);
        let rows = (0..grid)
            .map(|k| k as f64 / grid as f64)
            .take_while(|&x| x <= x_top)
            .map(|x| (x, inv.eval(x)))
            .collect();
        Ok(TunnelRows { chan_var: chan.channel_msg_variance(false), rows })
    }

    fn coefficient(&self, d: usize, x: f64) -> f64 {
        info_from_reliability((d - 1) as f64 * reliability(x) + self.chan_var)
    }

    /// Smallest `I_E,unS(x) - target` over the rows.
    pub fn min_slack(&self, lambda: &DegreeDistribution) -> f64 {
        self.rows
            .iter()
            .map(|&(x, t)| lambda.entries().iter().map(|&(d, w)| w * self.coefficient(d, x)).sum::<f64>() - t)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_open(&self, lambda: &DegreeDistribution) -> bool {
        self.min_slack(lambda) > 0.0
    }
}

/// Rows of the structured component at `chan`.
pub fn tunnel_rows(comp: &StructuredComponent, opts: &DesignOptions) -> Result<TunnelRows> {
    let forward = structured_exit_curve(comp, opts.grid)?;
    TunnelRows::from_structured(&forward, comp.channel(), opts.grid, opts.tunnel_top)
}

/// Maximizes `Σ λ_d/d` over degrees `min_degree..=d_v_max` subject to every
/// tunnel row (with margin). Rows are added lazily: the LP is solved on a
/// thin subset, then the most violated rows are appended until none is left.
pub fn optimize_lambda_rows(sets: &[TunnelRows], d_v_max: usize, opts: &DesignOptions) -> Result<DegreeDistribution> {
    if d_v_max < opts.min_degree.max(1) {
        return Err(Error::Invalid(format!("d_v_max {d_v_max} below the minimum degree {}", opts.min_degree)));
    }
    let degrees: Vec<usize> = (opts.min_degree.max(1)..=d_v_max).collect();
    let coeffs: Vec<Vec<Vec<f64>>> = sets
        .iter()
        .map(|s| s.rows.iter().map(|&(x, _)| degrees.iter().map(|&d| s.coefficient(d, x)).collect()).collect())
        .collect();
    let total: usize = sets.iter().map(|s| s.rows.len()).sum();
    let mut active: Vec<Vec<bool>> = sets.iter().map(|s| vec![false; s.rows.len()]).collect();
    for a in active.iter_mut() {
        let n = a.len();
        let stride = (n / 48).max(1);
        for k in (0..n).step_by(stride) {
            a[k] = true;
        }
        if n > 0 {
            a[n - 1] = true;
        }
    }
    let objective: Vec<f64> = degrees.iter().map(|&d| 1.0 / d as f64).collect();
    for _ in 0..=total {
        let mut lp = LinearProgram::new(objective.clone());
        lp.add(vec![1.0; degrees.len()], Cmp::Eq, 1.0);
        for (si, s) in sets.iter().enumerate() {
            for (k, &(_, t)) in s.rows.iter().enumerate() {
                if active[si][k] {
                    lp.add(coeffs[si][k].clone(), Cmp::Ge, t + opts.margin);
                }
            }
        }
        let sol = lp.solve().map_err(|e| match e {
            Error::Infeasible(_) => Error::Infeasible("no open tunnel at this channel".into()),
            e => e,
        })?;
        let mut violated: Vec<(f64, usize, usize)> = Vec::new();
        for (si, s) in sets.iter().enumerate() {
            for (k, &(_, t)) in s.rows.iter().enumerate() {
                let v: f64 = coeffs[si][k].iter().zip(&sol.x).map(|(a, b)| a * b).sum();
                let short = t + opts.margin - v;
                if short > 1e-12 && !active[si][k] {
                    violated.push((short, si, k));
                }
            }
        }
        if violated.is_empty() {
            let entries = degrees.iter().zip(&sol.x).filter(|e| *e.1 > 1e-12).map(|(&d, &w)| (d, w));
            return DegreeDistribution::normalized(entries);
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0));
        for &(_, si, k) in violated.iter().take(24) {
            active[si][k] = true;
        }
    }
    Err(Error::NoConvergence { iterations: total, residual: f64::NAN })
}

/// Single-channel form: tunnel rows taken from an already inverted
/// structured curve over the whole grid up to `opts.tunnel_top`.
pub fn optimize_lambda(
    chan: ChannelParam,
    inv_structured: &ExitCurve,
    d_v_max: usize,
    opts: &DesignOptions,
) -> Result<DegreeDistribution> {
    let rows = (0..opts.grid)
        .map(|k| k as f64 / opts.grid as f64)
        .map(|x| (x, inv_structured.eval(x)))
        .take_while(|&(_, t)| t <= opts.tunnel_top)
        .collect();
    let set = TunnelRows { chan_var: chan.channel_msg_variance(false), rows };
    optimize_lambda_rows(&[set], d_v_max, opts)
}

/// Eb/N0 (dB) at `rate` that sits `gap` dB above the Shannon limit.
pub fn channel_at_gap(rate: Rate, gap: f64) -> Result<ChannelParam> {
    ChannelParam::from_ebn0_db(shannon_ebn0_db(rate.value())? + gap, rate.value())
}

/// Tunnel test of `lambda` against the structured part at `chan`, punctured
/// for `rate`.
pub fn tunnel_open_at(spec: &SemiStructuredSpec, rate: Rate, chan: ChannelParam, opts: &DesignOptions) -> Result<bool> {
    let comp = spec.structure.component_at(chan, rate)?;
    Ok(tunnel_rows(&comp, opts)?.is_open(&spec.lambda))
}

/// Largest noise variance (bisection resolution `opts.sigma2_resolution`)
/// at which the tunnel is open at `rate`.
pub fn predict_threshold(spec: &SemiStructuredSpec, rate: Rate, opts: &DesignOptions) -> Result<ChannelParam> {
    let mut hi = channel_at_gap(rate, 0.0)?.noise_variance();
    let mut lo = channel_at_gap(rate, 8.0)?.noise_variance();
    if !tunnel_open_at(spec, rate, ChannelParam::new(lo)?, opts)? {
        return Err(Error::DesignFailed(format!("tunnel closed at rate {rate} even 8 dB above capacity")));
    }
    while hi - lo > opts.sigma2_resolution {
        let mid = 0.5 * (lo + hi);
        if tunnel_open_at(spec, rate, ChannelParam::new(mid)?, opts)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ChannelParam::new(lo)
}

/// Threshold report of `spec` at each rate.
pub fn threshold_report(spec: &SemiStructuredSpec, rates: &[Rate], opts: &DesignOptions) -> Result<Vec<ThresholdRow>> {
    rates.iter().map(|&r| ThresholdRow::new(r, predict_threshold(spec, r, opts)?)).collect()
}

/// Outcome of [`design_at_rate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub spec: SemiStructuredSpec,
    pub rate: f64,
    pub chan: ChannelParam,
    pub gap_db: f64,
}

/// Walks the channel down from the Shannon limit of `target` in
/// `opts.step_db` steps, solving the LP at each, and returns the first
/// design whose rate reaches the target.
pub fn design_at_rate(
    target: f64,
    structure: &StructureTemplate,
    d_v_max: usize,
    opts: &DesignOptions,
) -> Result<Design> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target rate must be in (0,1), got {target}")));
    }
    let shannon = shannon_ebn0_db(target)?;
    let steps = (opts.max_gap_db / opts.step_db).round() as usize;
    for k in 0..=steps {
        let gap = k as f64 * opts.step_db;
        let chan = ChannelParam::from_ebn0_db(shannon + gap, target)?;
        let rows = tunnel_rows(&structure.component(chan)?, opts)?;
        let lambda = match optimize_lambda_rows(&[rows], d_v_max, opts) {
            Ok(l) => l,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let spec = SemiStructuredSpec { structure: structure.clone(), lambda, d_v_max };
        let rate = rate_of(&spec)?;
        if rate >= target {
            return Ok(Design { spec, rate, chan, gap_db: gap });
        }
    }
    Err(Error::DesignFailed(format!(
        "rate {target} not reached within {} dB of capacity with d_v_max {d_v_max}",
        opts.max_gap_db
    )))
}

/// Rate set and gap sweep of a joint design.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDesignSpec {
    pub rates: Vec<Rate>,
    pub g_min: f64,
    pub g_max: f64,
    pub g_step: f64,
}

impl JointDesignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::Config("empty rate set".into()));
        }
        if !(self.g_min < self.g_max) || !(self.g_step > 0.0) {
            return Err(Error::Config(format!(
                "bad gap sweep {}:{}:{}",
                self.g_min, self.g_step, self.g_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDesign {
    pub spec: SemiStructuredSpec,
    pub g: f64,
    pub rate: f64,
}

/// Sweeps the common gap `g` upward. At each `g` the structured curve of
/// every rate (punctured by the designed pattern, channel `g` dB above that
/// rate's Shannon limit) contributes its tunnel rows to one LP; the first `g`
/// whose solution reaches the mother rate (minus `opts.rate_slack`) wins.
pub fn joint_optimize(
    jspec: &JointDesignSpec,
    structure: &StructureTemplate,
    d_v_max: usize,
    opts: &DesignOptions,
) -> Result<JointDesign> {
    jspec.validate()?;
    let mother = structure.mother_rate()?.value();
    let steps = ((jspec.g_max - jspec.g_min) / jspec.g_step + 1e-9).floor() as usize;
    let mut best: Option<(f64, DegreeDistribution)> = None;
    for k in 0..=steps {
        let g = jspec.g_min + k as f64 * jspec.g_step;
        let sets = jspec
            .rates
            .iter()
            .map(|&r| tunnel_rows(&structure.component_at(channel_at_gap(r, g)?, r)?, opts))
            .collect::<Result<Vec<_>>>()?;
        let lambda = match optimize_lambda_rows(&sets, d_v_max, opts) {
            Ok(l) => l,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        };
        let spec = SemiStructuredSpec { structure: structure.clone(), lambda, d_v_max };
        let rate = rate_of(&spec)?;
        if rate >= mother - opts.rate_slack {
            return Ok(JointDesign { spec, g, rate });
        }
        if best.as_ref().is_none_or(|b| rate > b.0) {
            best = Some((rate, spec.lambda));
        }
    }
    let detail = match best {
        Some((r, l)) => format!("best rate {r:.4} with λ = {:?}", l.entries()),
        None => "no feasible LP".into(),
    };
    Err(Error::DesignFailed(format!("mother rate {mother:.4} not reached up to g = {} dB; {detail}", jspec.g_max)))
}

/// Writes λ as `degree,fraction` CSV.
pub fn lambda_csv(lambda: &DegreeDistribution) -> String {
    let mut s = String::from("degree,fraction\n");
    for (d, w) in lambda.entries() {
        s.push_str(&format!("{d},{w:.8}\n"));
    }
    s
}
