//! Grows a rate-compatible family by repeated check splitting and prints
//! the stage log, the mother protograph and its SR census.
use e2rc::builder::{build_family, rca_threshold_db};
use e2rc::proto_de::DeOptions;
use e2rc::protograph::starting_protograph;
use e2rc::structure::sr_classify;

fn main() -> e2rc::Result<()> {
    let opts = DeOptions { resolution_db: 1e-2, ..Default::default() };
    let family = build_family(&starting_protograph(), 2, 32, &rca_threshold_db(opts))?;
    print!("{}", family.stage_log_text());
    print!("{}", family.mother().to_text());
    println!("census {:?}", sr_classify(family.mother())?.census());
    Ok(())
}
