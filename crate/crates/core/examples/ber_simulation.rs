//! Short BER/FER run of the lifted protograph-1 at two punctured rates.
use e2rc::lift::lift;
use e2rc::protograph::protograph_one;
use e2rc::sim::{simulate, SimOptions, StopRule};
use e2rc::structure::{protograph_mask_for_rate, Rate};

fn main() -> e2rc::Result<()> {
    let g = protograph_one();
    let code = lift(&g, 64, 1)?;
    let masks = vec![
        protograph_mask_for_rate(&g, Rate::new(8, 16)?)?,
        protograph_mask_for_rate(&g, Rate::new(8, 12)?)?,
    ];
    let opts = SimOptions { stop: StopRule { min_frame_errors: 30, max_frames: 20_000 }, ..Default::default() };
    for r in simulate(&code, &masks, &[1.5, 2.0, 2.5], &opts, 1)? {
        print!("{}", r.to_csv());
    }
    Ok(())
}
