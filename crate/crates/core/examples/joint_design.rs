//! One degree distribution optimized for five punctured rates at once.
use e2rc::optimizer::{joint_optimize, threshold_report, CheckProfile, DesignOptions, JointDesignSpec, StructureTemplate};
use e2rc::report::threshold_csv;
use e2rc::structure::Rate;

fn main() -> e2rc::Result<()> {
    let rates: Vec<Rate> = [16, 14, 12, 10, 9].iter().map(|&d| Rate::new(8, d)).collect::<e2rc::Result<_>>()?;
    let template = StructureTemplate::new(32, CheckProfile::Concentrated(8));
    let opts = DesignOptions::default();
    let spec = JointDesignSpec { rates: rates.clone(), g_min: 0.0, g_max: 1.0, g_step: 0.01 };
    let jd = joint_optimize(&spec, &template, 20, &opts)?;
    println!("common gap target {:.2} dB, mother rate {:.4}", jd.g, jd.rate);
    for &(deg, w) in jd.spec.lambda.entries() {
        println!("lambda_{deg} = {w:.6}");
    }
    print!("{}", threshold_csv(&threshold_report(&jd.spec, &rates, &opts)?));
    Ok(())
}
