//! Exhaustive search for a single-check starting protograph, restricted to
//! five variables so it finishes in seconds.
use e2rc::builder::search_starting_protograph;
use e2rc::proto_de::DeOptions;

fn main() -> e2rc::Result<()> {
    let opts = DeOptions { resolution_db: 1e-3, ..Default::default() };
    let s = search_starting_protograph(1, 5, 12, 3, 5, &opts)?;
    println!("{} degree vectors, {} survived the sieve", s.space_size, s.survivors);
    for (d, t) in &s.ranking {
        println!("{d:?}  {:.3} dB  gap {:.3}", t.ebn0_db, t.gap_db);
    }
    print!("{}", s.best()?.to_text());
    Ok(())
}
