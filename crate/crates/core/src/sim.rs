//! Monte-Carlo BER/FER of lifted codes over BPSK/BIAWGN with puncturing.
//!
//! Frames are grouped in chunks of fixed size, each with its own generator
//! derived from `(seed, rate, point, chunk)`. Chunks run in waves; the stop
//! rule is checked between waves, so counts do not depend on the number of
//! threads.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codec::BpDecoder;
use crate::error::{Error, Result};
use crate::infotheory::ChannelParam;
use crate::lift::{systematic_columns, LiftedCode};
use crate::structure::Rate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { min_frame_errors: 100, max_frames: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub stop: StopRule,
    pub max_iters: usize,
    pub chunk_frames: u64,
    pub wave_chunks: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { stop: StopRule::default(), max_iters: 100, chunk_frames: 16, wave_chunks: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub ebn0_db: f64,
    pub rate: Rate,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub iterations: u64,
}

impl SimRow {
    /// Errors per information bit.
    pub fn ber(&self, k: usize) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.bit_errors as f64 / (self.frames as f64 * k as f64)
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    pub fn avg_iters(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.iterations as f64 / self.frames as f64
        }
    }
}

/// Rows of one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub rate: Rate,
    /// Information bits per frame.
    pub k: usize,
    pub rows: Vec<SimRow>,
}

impl SimResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("ebn0_db,rate,frames,bit_errors,frame_errors,ber,fer,avg_iters\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:.4},{},{},{},{},{:.6e},{:.6e},{:.3}",
                r.ebn0_db,
                r.rate,
                r.frames,
                r.bit_errors,
                r.frame_errors,
                r.ber(self.k),
                r.fer(),
                r.avg_iters()
            );
        }
        s
    }

    /// First Eb/N0 at which the BER reaches `target`, interpolated
    /// log-linearly from the point before. `None` if never reached.
    pub fn measured_threshold(&self, target: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.ebn0_db, r.ber(self.k))).collect();
        let i = pts.iter().position(|&(_, b)| b <= target)?;
        if i == 0 {
            return Some(pts[0].0);
        }
        let ((x0, b0), (x1, b1)) = (pts[i - 1], pts[i]);
        if b1 <= 0.0 || b0 <= 0.0 {
            return Some(x1);
        }
        let t = (b0.ln() - target.ln()) / (b0.ln() - b1.ln());
        Some(x0 + t * (x1 - x0))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    iterations: u64,
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            frames: self.frames + o.frames,
            bit_errors: self.bit_errors + o.bit_errors,
            frame_errors: self.frame_errors + o.frame_errors,
            iterations: self.iterations + o.iterations,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chunk_seed(seed: u64, rate_idx: usize, point: usize, chunk: u64) -> u64 {
    splitmix(splitmix(splitmix(seed ^ splitmix(rate_idx as u64)) ^ point as u64) ^ chunk)
}

/// Transmitted rate of the code under a per-protograph-variable mask.
pub fn masked_rate(code: &LiftedCode, base_mask: &[bool]) -> Result<Rate> {
    let g = code.proto().with_punctured(base_mask.to_vec())?;
    crate::proto_de::protograph_rate(&g)
}

/// Simulates every mask at every Eb/N0 (dB, per rate). Masks are
/// per protograph variable and must be nested in the given order or its
/// reverse.
pub fn simulate(
    code: &LiftedCode,
    masks: &[Vec<bool>],
    ebn0_db: &[f64],
    opts: &SimOptions,
    seed: u64,
) -> Result<Vec<SimResult>> {
    if opts.chunk_frames == 0 || opts.wave_chunks == 0 {
        return Err(Error::Invalid("chunk and wave sizes must be positive".into()));
    }
    check_nested(masks)?;
    let info = systematic_columns(code.proto(), code.q());
    masks
        .iter()
        .enumerate()
        .map(|(ri, base)| {
            let rate = masked_rate(code, base)?;
            let mask = code.expand_mask(base)?;
            let rows = ebn0_db
                .iter()
                .enumerate()
                .map(|(pi, &db)| {
                    let chan = ChannelParam::from_ebn0_db(db, rate.value())?;
                    let c = run_point(code, &mask, &info, chan, opts, |chunk| chunk_seed(seed, ri, pi, chunk));
                    Ok(SimRow {
                        ebn0_db: db,
                        rate,
                        frames: c.frames,
                        bit_errors: c.bit_errors,
                        frame_errors: c.frame_errors,
                        iterations: c.iterations,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SimResult { rate, k: info.len(), rows })
        })
        .collect()
}

fn check_nested(masks: &[Vec<bool>]) -> Result<()> {
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&x, &y)| !x || y);
    let fwd = masks.windows(2).all(|w| subset(&w[0], &w[1]));
    let rev = masks.windows(2).all(|w| subset(&w[1], &w[0]));
    if fwd || rev {
        Ok(())
    } else {
        Err(Error::Invalid("puncture masks are not nested".into()))
    }
}

fn run_point(
    code: &LiftedCode,
    mask: &[bool],
    info: &[usize],
    chan: ChannelParam,
    opts: &SimOptions,
    seed_of: impl Fn(u64) -> u64 + Sync,
) -> Counts {
    let sigma = chan.noise_variance().sqrt();
    let mut total = Counts::default();
    let mut next_chunk = 0u64;
    while total.frame_errors < opts.stop.min_frame_errors && total.frames < opts.stop.max_frames {
        let left = opts.stop.max_frames - total.frames;
        let chunks: Vec<(u64, u64)> = (0..opts.wave_chunks)
            .map(|i| (next_chunk + i, opts.chunk_frames))
            .scan(left, |rem, (id, f)| {
                if *rem == 0 {
                    return None;
                }
                let f = f.min(*rem);
                *rem -= f;
                Some((id, f))
            })
            .collect();
        next_chunk += opts.wave_chunks;
        let wave = chunks
            .par_iter()
            .map_init(
                || BpDecoder::new(code.h()),
                |dec, &(id, frames)| run_chunk(code, dec, mask, info, sigma, frames, seed_of(id), opts.max_iters),
            )
            .reduce(Counts::default, Counts::add);
        total = total.add(wave);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn run_chunk(
    code: &LiftedCode,
    dec: &mut BpDecoder,
    mask: &[bool],
    info: &[usize],
    sigma: f64,
    frames: u64,
    seed: u64,
    max_iters: usize,
) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Counts::default();
    let plan = code.encoder_plan();
    let n = code.n();
    let mut llr = vec![0.0; n];
    for _ in 0..frames {
        // Without an encoder the all-zero word is sent.
        let x = match plan {
            Some(p) => {
                let msg: Vec<u8> = (0..p.k()).map(|_| rng.random_range(0..2u8)).collect();
                p.encode(code.h(), &msg).expect("message length matches the plan")
            }
            None => vec![0; n],
        };
        for i in 0..n {
            let noise: f64 = rng.sample(StandardNormal);
            llr[i] = if mask[i] { 0.0 } else { 2.0 * ((1.0 - 2.0 * x[i] as f64) + sigma * noise) / (sigma * sigma) };
        }
        let r = dec.decode(&llr, max_iters);
        let errs = info.iter().filter(|&&i| r.bits[i] != x[i]).count() as u64;
        c.frames += 1;
        c.iterations += r.iterations as u64;
        c.bit_errors += errs;
        c.frame_errors += (errs > 0) as u64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::lift;
    use crate::protograph::protograph_one;
    use crate::structure::protograph_mask_for_rate;

    #[test]
    fn genie_channel_is_error_free() {
        let code = lift(&protograph_one(), 64, 1).unwrap();
        let opts = SimOptions { stop: StopRule { min_frame_errors: 1, max_frames: 100 }, ..Default::default() };
        let r = simulate(&code, &[vec![false; 16]], &[30.0], &opts, 4).unwrap();
        assert_eq!(r[0].rows[0].frames, 100);
        assert_eq!(r[0].rows[0].bit_errors, 0);
    }

    #[test]
    fn same_seed_same_counts() {
        let g = protograph_one();
        let code = lift(&g, 64, 1).unwrap();
        let masks = vec![protograph_mask_for_rate(&g, Rate::new(8, 12).unwrap()).unwrap()];
        let opts = SimOptions { stop: StopRule { min_frame_errors: 20, max_frames: 2000 }, ..Default::default() };
        let a = simulate(&code, &masks, &[1.0, 1.5], &opts, 9).unwrap();
        let b = simulate(&code, &masks, &[1.0, 1.5], &opts, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].rate, Rate::new(2, 3).unwrap());
        for r in &a[0].rows {
            assert!(r.fer() >= r.ber(a[0].k));
        }
        assert!(a[0].to_csv().starts_with("ebn0_db,rate,frames"));
    }

    #[test]
    fn rejects_crossing_masks() {
        let a = vec![true, false];
        let b = vec![false, true];
        assert!(check_nested(&[a, b]).is_err());
    }
}
