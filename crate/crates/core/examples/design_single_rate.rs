//! LP design of the systematic degree distribution at rate 1/2 over the
//! E2RC parity structure with a two-degree check profile.
use e2rc::infotheory::DegreeDistribution;
use e2rc::optimizer::{design_at_rate, CheckProfile, DesignOptions, StructureTemplate};

fn main() -> e2rc::Result<()> {
    let rho = DegreeDistribution::new([(6, 0.339623), (7, 0.660377)])?;
    let template = StructureTemplate::new(32, CheckProfile::Distribution(rho));
    let d = design_at_rate(0.5, &template, 20, &DesignOptions::default())?;
    for &(deg, w) in d.spec.lambda.entries() {
        println!("lambda_{deg} = {w:.6}");
    }
    println!("rate {:.5}  threshold sigma2 {:.5}  gap {:.3} dB", d.rate, d.chan.noise_variance(), d.gap_db);
    Ok(())
}
