//! Base graphs with node roles and puncturing.
//!
//! Text format, one item per line:
//!
//! ```text
//! m n
//! <m rows of n multiplicities>
//! <n roles: s = systematic, o = parity from the starting graph, p = parity added by splitting>
//! <n puncture flags: 0 or 1>
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    Systematic,
    /// Parity node that predates check-splitting (never punctured by the designed pattern).
    ParityOld,
    /// Degree-1/2 parity node of the E2RC part.
    ParityNew,
}

impl VarRole {
    fn code(self) -> char {
        match self {
            VarRole::Systematic => 's',
            VarRole::ParityOld => 'o',
            VarRole::ParityNew => 'p',
        }
    }

    fn from_code(s: &str) -> Option<Self> {
        match s {
            "s" => Some(VarRole::Systematic),
            "o" => Some(VarRole::ParityOld),
            "p" => Some(VarRole::ParityNew),
            _ => None,
        }
    }

    pub fn is_parity(self) -> bool {
        !matches!(self, VarRole::Systematic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protograph {
    checks: usize,
    vars: usize,
    /// Row-major edge multiplicities.
    base: Vec<u32>,
    roles: Vec<VarRole>,
    punctured: Vec<bool>,
}

impl Protograph {
    pub fn new(rows: Vec<Vec<u32>>, roles: Vec<VarRole>, punctured: Vec<bool>) -> Result<Self> {
        let checks = rows.len();
        if checks == 0 {
            return Err(Error::Invalid("protograph has no checks".into()));
        }
        let vars = rows[0].len();
        if vars == 0 {
            return Err(Error::Invalid("protograph has no variables".into()));
        }
        if rows.iter().any(|r| r.len() != vars) {
            return Err(Error::Invalid("ragged base matrix".into()));
        }
        if roles.len() != vars || punctured.len() != vars {
            return Err(Error::Invalid(format!(
                "expected {vars} roles and puncture flags, got {} and {}",
                roles.len(),
                punctured.len()
            )));
        }
        let base: Vec<u32> = rows.into_iter().flatten().collect();
        let g = Protograph { checks, vars, base, roles, punctured };
        for c in 0..checks {
            if g.row(c).iter().all(|&x| x == 0) {
                return Err(Error::Invalid(format!("check {c} has no edges")));
            }
        }
        for v in 0..vars {
            if g.var_degree(v) == 0 {
                return Err(Error::Invalid(format!("variable {v} has no edges")));
            }
        }
        Ok(g)
    }

    /// All variables transmitted.
    pub fn unpunctured(rows: Vec<Vec<u32>>, roles: Vec<VarRole>) -> Result<Self> {
        let n = roles.len();
        Self::new(rows, roles, vec![false; n])
    }

    pub fn num_checks(&self) -> usize {
        self.checks
    }

    pub fn num_vars(&self) -> usize {
        self.vars
    }

    #[inline]
    pub fn get(&self, c: usize, v: usize) -> u32 {
        self.base[c * self.vars + v]
    }

    pub fn row(&self, c: usize) -> &[u32] {
        &self.base[c * self.vars..(c + 1) * self.vars]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.checks).map(|c| self.row(c).to_vec()).collect()
    }

    pub fn var_degree(&self, v: usize) -> u32 {
        (0..self.checks).map(|c| self.get(c, v)).sum()
    }

    pub fn check_degree(&self, c: usize) -> u32 {
        self.row(c).iter().sum()
    }

    pub fn num_edges(&self) -> u32 {
        self.base.iter().sum()
    }

    pub fn roles(&self) -> &[VarRole] {
        &self.roles
    }

    pub fn role(&self, v: usize) -> VarRole {
        self.roles[v]
    }

    pub fn punctured(&self) -> &[bool] {
        &self.punctured
    }

    pub fn is_punctured(&self, v: usize) -> bool {
        self.punctured[v]
    }

    pub fn num_punctured(&self) -> usize {
        self.punctured.iter().filter(|&&p| p).count()
    }

    pub fn num_systematic(&self) -> usize {
        self.roles.iter().filter(|r| **r == VarRole::Systematic).count()
    }

    pub fn vars_with_role(&self, role: VarRole) -> Vec<usize> {
        (0..self.vars).filter(|&v| self.roles[v] == role).collect()
    }

    /// `(n - m) / n` with every variable transmitted.
    pub fn design_rate(&self) -> f64 {
        (self.vars as f64 - self.checks as f64) / self.vars as f64
    }

    /// `(n - m) / (n - punctured)`.
    pub fn transmitted_rate(&self) -> f64 {
        (self.vars as f64 - self.checks as f64) / (self.vars - self.num_punctured()) as f64
    }

    /// Same graph with a new puncture pattern.
    pub fn with_punctured(&self, punctured: Vec<bool>) -> Result<Self> {
        if punctured.len() != self.vars {
            return Err(Error::Invalid(format!(
                "puncture mask has {} entries for {} variables",
                punctured.len(),
                self.vars
            )));
        }
        let mut g = self.clone();
        g.punctured = punctured;
        Ok(g)
    }

    pub fn with_roles(&self, roles: Vec<VarRole>) -> Result<Self> {
        if roles.len() != self.vars {
            return Err(Error::Invalid("role vector length mismatch".into()));
        }
        let mut g = self.clone();
        g.roles = roles;
        Ok(g)
    }

    /// Column permutation: variable `perm[j]` of `self` becomes variable `j`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.vars];
        if perm.len() != self.vars || perm.iter().any(|&p| p >= self.vars || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Invalid("not a permutation".into()));
        }
        let rows = (0..self.checks)
            .map(|c| perm.iter().map(|&p| self.get(c, p)).collect())
            .collect();
        Protograph::new(
            rows,
            perm.iter().map(|&p| self.roles[p]).collect(),
            perm.iter().map(|&p| self.punctured[p]).collect(),
        )
    }

    /// Nonzero entries as `(check, var, multiplicity)`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for c in 0..self.checks {
            for v in 0..self.vars {
                let k = self.get(c, v);
                if k > 0 {
                    out.push((c, v, k));
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl fmt::Display for Protograph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.checks, self.vars)?;
        for c in 0..self.checks {
            let row: Vec<String> = self.row(c).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        let roles: Vec<String> = self.roles.iter().map(|r| r.code().to_string()).collect();
        writeln!(f, "{}", roles.join(" "))?;
        let punct: Vec<&str> = self.punctured.iter().map(|&p| if p { "1" } else { "0" }).collect();
        writeln!(f, "{}", punct.join(" "))
    }
}

impl FromStr for Protograph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        if dims.len() != 2 {
            return Err(Error::Parse { line: ln, msg: "expected `m n`".into() });
        }
        let (m, n) = (dims[0], dims[1]);
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing matrix row".into() })?;
            let row: Vec<u32> = l
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
            if row.len() != n {
                return Err(Error::Parse { line: ln, msg: format!("expected {n} entries, got {}", row.len()) });
            }
            rows.push(row);
        }
        let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing role row".into() })?;
        let roles: Vec<VarRole> = l
            .split_whitespace()
            .map(|t| VarRole::from_code(t).ok_or(Error::Parse { line: ln, msg: format!("unknown role `{t}`") }))
            .collect::<Result<_>>()?;
        let (ln, l) = lines.next().ok_or(Error::Parse { line: ln, msg: "missing puncture row".into() })?;
        let punctured: Vec<bool> = l
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(Error::Parse { line: ln, msg: format!("bad puncture flag `{t}`") }),
            })
            .collect::<Result<_>>()?;
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "trailing content".into() });
        }
        Protograph::new(rows, roles, punctured).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }
}

/// The 8x16 mother protograph used throughout the examples: `v0..v7`
/// systematic, `v8` the parity node of the starting graph, `v9..v15` the
/// degree-2 nodes added by splitting.
pub fn protograph_one() -> Protograph {
    let rows = vec![
        vec![3, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0],
        vec![2, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1, 0, 0, 0],
        vec![3, 1, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0],
        vec![2, 1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0],
        vec![3, 1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0],
        vec![2, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 0],
        vec![3, 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1],
        vec![2, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1],
    ];
    let mut roles = vec![VarRole::Systematic; 8];
    roles.push(VarRole::ParityOld);
    roles.extend(std::iter::repeat_n(VarRole::ParityNew, 7));
    Protograph::unpunctured(rows, roles).expect("fixture is valid")
}

/// One check, nine variables with degrees {20,8,3,...,3}; the last degree-3
/// node is the parity node.
pub fn starting_protograph() -> Protograph {
    let rows = vec![vec![20, 8, 3, 3, 3, 3, 3, 3, 3]];
    let mut roles = vec![VarRole::Systematic; 8];
    roles.push(VarRole::ParityOld);
    Protograph::unpunctured(rows, roles).expect("fixture is valid")
}
