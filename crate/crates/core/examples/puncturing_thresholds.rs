//! Predicted thresholds of one mother code punctured to higher rates.
use e2rc::infotheory::DegreeDistribution;
use e2rc::optimizer::{threshold_report, CheckProfile, DesignOptions, SemiStructuredSpec, StructureTemplate};
use e2rc::report::threshold_csv;
use e2rc::structure::Rate;

fn main() -> e2rc::Result<()> {
    let lambda = DegreeDistribution::new([(3, 0.305825), (7, 0.213474), (8, 0.181737), (20, 0.298964)])?;
    let spec = SemiStructuredSpec::new(StructureTemplate::new(32, CheckProfile::Concentrated(8)), lambda);
    let rates: Vec<Rate> = [16, 14, 12, 10, 9].iter().map(|&d| Rate::new(8, d)).collect::<e2rc::Result<_>>()?;
    print!("{}", threshold_csv(&threshold_report(&spec, &rates, &DesignOptions::default())?));
    Ok(())
}
