//! Runs a job from key=value text, as the command-line tool does.
use e2rc::jobs::{run_job, Command, JobConfig, RunContext};

fn main() -> e2rc::Result<()> {
    let cfg = JobConfig::from_text(Command::Lift, "protograph = protograph-1\nq = 128\n")?;
    let ctx = RunContext { seed: 5, threads: 1, out: std::env::temp_dir().join("e2rc_lift_job") };
    let out = run_job(&cfg, &ctx)?;
    println!("{}", out.summary.join("\n"));
    println!("files: {:?} in {}", out.files, ctx.out.display());
    Ok(())
}
