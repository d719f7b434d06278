//! Rate-compatible protograph families by check splitting.
//!
//! A split replaces one check by two offspring joined through a new degree-2
//! parity node. The first offspring keeps every edge the parent had to
//! earlier split nodes; the edges to the original ("old") nodes are shared
//! between the two according to a [`SplitPattern`]. Puncturing the new node
//! undoes the split, so a family built this way is rate compatible.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::infotheory::ChannelParam;
use crate::proto_de::{protograph_rate, rca_converges, rca_threshold, DeOptions};
use crate::protograph::{Protograph, VarRole};
use crate::report::ThresholdRow;

/// Old-node edges of the two offspring; `s01` goes to the offspring that
/// inherits the parent's new-node edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplitPattern {
    pub s01: Vec<u32>,
    pub s02: Vec<u32>,
}

impl SplitPattern {
    pub fn sum(&self) -> Vec<u32> {
        self.s01.iter().zip(&self.s02).map(|(a, b)| a + b).collect()
    }

    pub fn mirrored(&self) -> SplitPattern {
        SplitPattern { s01: self.s02.clone(), s02: self.s01.clone() }
    }

    pub fn is_equal_split(&self) -> bool {
        self.s01.iter().zip(&self.s02).all(|(a, b)| a.abs_diff(*b) <= 1)
    }
}

impl fmt::Display for SplitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "[{}] / [{}]", j(&self.s01), j(&self.s02))
    }
}

/// Columns that are not products of splitting (systematic and old parity).
pub fn old_columns(g: &Protograph) -> Vec<usize> {
    (0..g.num_vars()).filter(|&v| g.role(v) != VarRole::ParityNew).collect()
}

/// Old-node connection vector of `check`.
pub fn old_vector(g: &Protograph, check: usize) -> Vec<u32> {
    old_columns(g).into_iter().map(|v| g.get(check, v)).collect()
}

/// Splits `check`. The first offspring stays at index `check`, the second
/// is inserted right after it and the new node is appended as the last
/// column.
pub fn check_split(g: &Protograph, check: usize, pattern: &SplitPattern) -> Result<Protograph> {
    if check >= g.num_checks() {
        return Err(Error::Invalid(format!("check {check} out of range")));
    }
    let old = old_columns(g);
    if pattern.s01.len() != old.len() || pattern.s02.len() != old.len() {
        return Err(Error::Invalid(format!("pattern length differs from the {} old nodes", old.len())));
    }
    if pattern.sum() != old_vector(g, check) {
        return Err(Error::Invalid(format!("pattern {pattern} does not sum to the old-node vector of check {check}")));
    }
    let n = g.num_vars();
    let mut rows = Vec::with_capacity(g.num_checks() + 1);
    for (c, row) in g.rows().into_iter().enumerate() {
        if c != check {
            let mut r = row;
            r.push(0);
            rows.push(r);
            continue;
        }
        let mut first = row.clone();
        let mut second = vec![0u32; n + 1];
        for (i, &v) in old.iter().enumerate() {
            first[v] = pattern.s01[i];
            second[v] = pattern.s02[i];
        }
        first.push(1);
        second[n] = 1;
        rows.push(first);
        rows.push(second);
    }
    let mut roles = g.roles().to_vec();
    roles.push(VarRole::ParityNew);
    let mut punctured = g.punctured().to_vec();
    punctured.push(false);
    Protograph::new(rows, roles, punctured)
}

/// Splits with `|s01[i] - s02[i]| <= 1` everywhere, at most `budget` of
/// them. Even entries are halved; each odd entry is a binary choice. The
/// first pattern gives every extra edge to `s01`, later ones follow a binary
/// counter with the first odd entry as the most significant bit.
pub fn enumerate_equal_splits(s0: &[u32], budget: usize) -> Vec<SplitPattern> {
    let odd: Vec<usize> = (0..s0.len()).filter(|&i| s0[i] % 2 == 1).collect();
    let total: u128 = 1u128 << odd.len().min(127);
    let count = (budget as u128).min(total) as usize;
    (0..count)
        .map(|code| {
            let mut s01: Vec<u32> = s0.iter().map(|x| x / 2).collect();
            let mut s02 = s01.clone();
            for (k, &i) in odd.iter().enumerate() {
                let bit = (code >> (odd.len() - 1 - k)) & 1;
                if bit == 0 {
                    s01[i] += 1;
                } else {
                    s02[i] += 1;
                }
            }
            SplitPattern { s01, s02 }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageEntry {
    pub stage: usize,
    /// Index of the split check in the graph before the split.
    pub check: usize,
    pub pattern: SplitPattern,
    pub new_node: usize,
    /// Threshold of the graph right after this split (Eb/N0 dB).
    pub threshold_db: f64,
}

/// A nested family: `members[0]` is the start, each later member adds one
/// split, the last member is the mother code.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtographFamily {
    pub members: Vec<Protograph>,
    pub log: Vec<StageEntry>,
}

impl ProtographFamily {
    pub fn start(&self) -> &Protograph {
        &self.members[0]
    }

    pub fn mother(&self) -> &Protograph {
        self.members.last().expect("family is never empty")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Mask on the mother that reproduces member `j`: every node added
    /// after step `j` is punctured.
    pub fn mask_for_member(&self, j: usize) -> Result<Vec<bool>> {
        if j >= self.members.len() {
            return Err(Error::Invalid(format!("family has {} members", self.members.len())));
        }
        let first_new = self.members[j].num_vars();
        Ok((0..self.mother().num_vars()).map(|v| v >= first_new).collect())
    }

    /// `(mother, mask)` per member, highest rate first.
    pub fn masked_members(&self) -> Result<Vec<(Protograph, Vec<bool>)>> {
        (0..self.members.len()).map(|j| Ok((self.mother().clone(), self.mask_for_member(j)?))).collect()
    }

    /// Mother with puncturing for member `j` applied.
    pub fn punctured_mother(&self, j: usize) -> Result<Protograph> {
        self.mother().with_punctured(self.mask_for_member(j)?)
    }

    pub fn stage_log_text(&self) -> String {
        let mut s = String::from("# stage check new_node threshold_db pattern\n");
        for e in &self.log {
            s.push_str(&format!("{} {} {} {:.4} {}\n", e.stage, e.check, e.new_node, e.threshold_db, e.pattern));
        }
        s
    }
}

/// Threshold (Eb/N0 dB, lower is better) used to rank candidate splits.
pub type ThresholdFn<'a> = dyn Fn(&Protograph) -> Result<f64> + Sync + 'a;

/// RCA threshold in dB, `+inf` when DE never converges.
pub fn rca_threshold_db(opts: DeOptions) -> impl Fn(&Protograph) -> Result<f64> + Sync {
    move |g: &Protograph| Ok(rca_threshold(g, &opts)?.map_or(f64::INFINITY, |t| t.ebn0_db))
}

/// Greedy family construction. Each stage splits every check present at
/// its start once; at each step the (check, pattern) pair with the lowest
/// threshold of the resulting graph wins, ties going to the lower check
/// index and then the earlier pattern. Mirror images of a pattern are only
/// both tried when the check already has new-node edges.
pub fn build_family(
    start: &Protograph,
    stages: usize,
    pattern_budget: usize,
    threshold_fn: &ThresholdFn<'_>,
) -> Result<ProtographFamily> {
    let mut members = vec![start.clone()];
    let mut log = Vec::new();
    for stage in 1..=stages {
        let mut g = members.last().expect("non-empty").clone();
        // Rows of checks not yet split in this stage.
        let mut pending: Vec<bool> = vec![true; g.num_checks()];
        while pending.iter().any(|&p| p) {
            let mut candidates = Vec::new();
            for c in (0..g.num_checks()).filter(|&c| pending[c]) {
                let has_new = (0..g.num_vars()).any(|v| g.role(v) == VarRole::ParityNew && g.get(c, v) > 0);
                for p in enumerate_equal_splits(&old_vector(&g, c), pattern_budget) {
                    if has_new || p.s01 >= p.s02 {
                        candidates.push((c, p));
                    }
                }
            }
            let scored: Vec<(f64, usize, Protograph)> = candidates
                .par_iter()
                .enumerate()
                .map(|(i, (c, p))| {
                    let next = check_split(&g, *c, p)?;
                    Ok((threshold_fn(&next)?, i, next))
                })
                .collect::<Result<_>>()?;
            let (th, i, next) = scored
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .ok_or_else(|| Error::Construction("no admissible split".into()))?;
            let (c, pattern) = candidates.swap_remove(i);
            pending[c] = false;
            pending.insert(c + 1, false);
            log.push(StageEntry { stage, check: c, pattern, new_node: next.num_vars() - 1, threshold_db: th });
            g = next;
            members.push(g.clone());
        }
    }
    Ok(ProtographFamily { members, log })
}

/// Protograph with `m0` checks and the given variable degrees, each degree
/// spread as evenly as possible over the checks (remainders rotate so that
/// check degrees stay balanced). The last `m0` variables are the parity
/// nodes.
pub fn protograph_from_degrees(m0: usize, degrees: &[u32]) -> Result<Protograph> {
    if m0 == 0 || degrees.len() <= m0 {
        return Err(Error::Invalid(format!("need more than {m0} variables")));
    }
    let n = degrees.len();
    let mut rows = vec![vec![0u32; n]; m0];
    let mut next = 0;
    for (v, &d) in degrees.iter().enumerate() {
        let base = d / m0 as u32;
        for row in rows.iter_mut() {
            row[v] = base;
        }
        for _ in 0..(d % m0 as u32) {
            rows[next % m0][v] += 1;
            next += 1;
        }
    }
    let mut roles = vec![VarRole::Systematic; n - m0];
    roles.extend(std::iter::repeat_n(VarRole::ParityOld, m0));
    Protograph::unpunctured(rows, roles)
}

/// Nonincreasing degree vectors of length `n` with entries in `[lo, hi]`.
pub fn degree_vectors(n: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, lo: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for d in (lo..=cap).rev() {
            cur.push(d);
            rec(n, lo, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, lo, hi, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Ranked result of [`search_starting_protograph`].
#[derive(Debug, Clone, PartialEq)]
pub struct StartSearch {
    /// Best candidates first.
    pub ranking: Vec<(Vec<u32>, ThresholdRow)>,
    pub space_size: usize,
    /// Candidates whose DE converged at the sieve channel.
    pub survivors: usize,
}

impl StartSearch {
    pub fn best(&self) -> Result<Protograph> {
        let (deg, _) = self.ranking.first().ok_or_else(|| Error::Construction("empty ranking".into()))?;
        protograph_from_degrees(self.m0(), deg)
    }

    fn m0(&self) -> usize {
        self.ranking.first().map_or(1, |(d, r)| d.len() - (r.rate.num as usize * d.len() / r.rate.den as usize))
    }
}

/// Exhaustive search over degree vectors (nonincreasing, in
/// `[min_deg, d_v_max]`), returning the `keep` best by RCA threshold.
///
/// Exact thresholds are only computed where they can matter: the vectors
/// with at most two degrees above `min_deg` are bisected first, the
/// `keep`-th best of those fixes a channel, and every vector is then run
/// through DE once at that channel. Only vectors that converge there can
/// beat the seeds, and those are bisected exactly.
pub fn search_starting_protograph(
    m0: usize,
    n0: usize,
    d_v_max: u32,
    min_deg: u32,
    keep: usize,
    opts: &DeOptions,
) -> Result<StartSearch> {
    if n0 <= m0 || min_deg > d_v_max || min_deg == 0 || keep == 0 {
        return Err(Error::Invalid(format!("empty search space (m0={m0}, n0={n0}, degrees {min_deg}..={d_v_max})")));
    }
    let all = degree_vectors(n0, min_deg, d_v_max);
    let space_size = all.len();
    let threshold = |d: &Vec<u32>| -> Result<Option<ThresholdRow>> { rca_threshold(&protograph_from_degrees(m0, d)?, opts) };
    let seeds: Vec<&Vec<u32>> = all.iter().filter(|d| d.iter().filter(|&&x| x > min_deg).count() <= 2).collect();
    let mut seeded: Vec<(Vec<u32>, ThresholdRow)> = seeds
        .par_iter()
        .map(|d| Ok(threshold(d)?.map(|t| ((*d).clone(), t))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    seeded.sort_by(|a, b| a.1.ebn0_db.total_cmp(&b.1.ebn0_db).then(b.0.cmp(&a.0)));
    let survivors: Vec<&Vec<u32>> = if seeded.len() >= keep && seeds.len() < all.len() {
        let cut = seeded[keep - 1].1;
        let chan = ChannelParam::new(cut.sigma2)?;
        all.par_iter()
            .filter(|d| {
                protograph_from_degrees(m0, d).map(|g| rca_converges(&g, chan, opts)).unwrap_or(false)
            })
            .collect()
    } else {
        all.iter().collect()
    };
    let n_surv = survivors.len();
    let mut ranking: Vec<(Vec<u32>, ThresholdRow)> = survivors
        .par_iter()
        .map(|d| Ok(threshold(d)?.map(|t| ((*d).clone(), t))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    ranking.sort_by(|a, b| a.1.ebn0_db.total_cmp(&b.1.ebn0_db).then(b.0.cmp(&a.0)));
    ranking.truncate(keep);
    if ranking.is_empty() {
        return Err(Error::Construction("no candidate converges".into()));
    }
    Ok(StartSearch { ranking, space_size, survivors: n_surv })
}

/// Transmitted rate of every member of a family, start first.
pub fn family_rates(family: &ProtographFamily) -> Result<Vec<crate::structure::Rate>> {
    family.members.iter().map(protograph_rate).collect()
}
