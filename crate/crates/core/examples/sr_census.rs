//! Recovery levels of the recursively doubled parity structure.
use e2rc::structure::{build_h2_base, sr_classify};

fn main() -> e2rc::Result<()> {
    for m in [4, 8, 16, 32] {
        let p = sr_classify(&build_h2_base(m)?)?;
        println!("m = {m}: {:?}", p.census());
    }
    Ok(())
}
