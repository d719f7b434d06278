//! Reciprocal-channel thresholds of a protograph family under its nested
//! puncturing patterns.
use e2rc::proto_de::{family_threshold_report, DeOptions};
use e2rc::protograph::protograph_one;
use e2rc::report::threshold_csv;
use e2rc::structure::{protograph_mask_for_rate, protograph_rates};

fn main() -> e2rc::Result<()> {
    let g = protograph_one();
    let members = protograph_rates(&g)
        .into_iter()
        .map(|r| Ok((g.clone(), protograph_mask_for_rate(&g, r)?)))
        .collect::<e2rc::Result<Vec<_>>>()?;
    print!("{}", threshold_csv(&family_threshold_report(&members, &DeOptions::default())?));
    Ok(())
}
