//! Lifts protograph-1 by 256-circulants, encodes a random message and
//! writes the parity-check matrix as alist.
use e2rc::codec::encode;
use e2rc::lift::lift;
use e2rc::protograph::protograph_one;
use rand::{Rng, SeedableRng};

fn main() -> e2rc::Result<()> {
    let code = lift(&protograph_one(), 256, 1)?;
    println!("n {} k {} girth {:?}", code.n(), code.k(), code.girth());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let msg: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
    let x = encode(&code, &msg)?;
    println!("codeword ok: {}", code.h().is_codeword(&x));
    let path = std::env::temp_dir().join("protograph1_q256.alist");
    std::fs::write(&path, code.h().to_alist())?;
    println!("wrote {}", path.display());
    Ok(())
}
