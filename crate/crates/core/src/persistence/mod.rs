//! Persistent homology over the two-element field.
//!
//! Three routes compute the same pairing: [`reduce_naive`] (plain
//! left-to-right reduction), [`reduce_twist`] (clearing, any complex) and the
//! cubical route used by [`reduce`] on periodic grids.

mod cubical;
mod matrix;
mod unionfind;

use serde::{Deserialize, Serialize};

pub use cubical::cubical_pairing;
pub use matrix::{naive_pairing, twist_pairing, BoundaryMatrix};
pub use unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::filtration::{Complex, Filtration, Provenance, TerminalShape};

/// Birth/death pairs as filtration positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(u32, u32)>,
    /// Positive cells that are never paired.
    pub essential: Vec<u32>,
}

impl Pairing {
    pub fn from_pairs(n: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        let mut used = vec![false; n];
        for &(b, d) in &pairs {
            used[b as usize] = true;
            used[d as usize] = true;
        }
        let essential = (0..n as u32).filter(|&p| !used[p as usize]).collect();
        Self { pairs, essential }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Naive,
    Twist,
    Cubical,
}

/// One interval `[birth, death)` in homological degree `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceBar {
    pub k: usize,
    #[serde(with = "crate::floatrepr")]
    pub birth: f64,
    /// `+inf` for essential classes.
    #[serde(with = "crate::floatrepr")]
    pub death: f64,
    /// Canonical index of the creating cell, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_cell: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub death_cell: Option<u64>,
}

impl PersistenceBar {
    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    /// Zero persistence. An essential class is never trivial, even when
    /// born at `+inf`.
    pub fn is_trivial(&self) -> bool {
        !self.is_essential() && self.birth == self.death
    }
}

/// A persistence diagram with the provenance of its filtration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub max_dim: usize,
    pub terminal: TerminalShape,
    pub provenance: Provenance,
    /// Sorted by `(k, birth, death)`; zero-persistence bars included.
    bars: Vec<PersistenceBar>,
}

impl Diagram {
    pub fn new(max_dim: usize, terminal: TerminalShape, provenance: Provenance, mut bars: Vec<PersistenceBar>) -> Self {
        bars.sort_by(|a, b| {
            a.k.cmp(&b.k)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Self {
            max_dim,
            terminal,
            provenance,
            bars,
        }
    }

    pub fn from_pairing(f: &Filtration, pairing: &Pairing) -> Self {
        let order = f.order();
        let births = f.births();
        let cx = f.complex();
        let mut bars = Vec::with_capacity(pairing.pairs.len() + pairing.essential.len());
        for &(b, d) in &pairing.pairs {
            let (cb, cd) = (order[b as usize] as usize, order[d as usize] as usize);
            bars.push(PersistenceBar {
                k: f.dim_of(cb),
                birth: births[cb],
                death: births[cd],
                birth_cell: Some(cx.canonical_index(cb)),
                death_cell: Some(cx.canonical_index(cd)),
            });
        }
        for &e in &pairing.essential {
            let c = order[e as usize] as usize;
            bars.push(PersistenceBar {
                k: f.dim_of(c),
                birth: births[c],
                death: f64::INFINITY,
                birth_cell: Some(cx.canonical_index(c)),
                death_cell: None,
            });
        }
        Self::new(f.max_dim(), f.terminal(), f.provenance(), bars)
    }

    /// Every bar, zero-persistence ones included.
    pub fn all_bars(&self) -> &[PersistenceBar] {
        &self.bars
    }

    /// Bars of degree `k` with positive persistence.
    pub fn bars(&self, k: usize) -> impl Iterator<Item = &PersistenceBar> + '_ {
        self.bars.iter().filter(move |b| b.k == k && !b.is_trivial())
    }

    /// Number of degree-`k` classes alive at `t`: `birth <= t < death`.
    pub fn betti_at(&self, t: f64, k: usize) -> usize {
        self.bars(k).filter(|b| b.birth <= t && t < b.death).count()
    }

    pub fn essential_count(&self, k: usize) -> usize {
        self.bars(k).filter(|b| b.is_essential()).count()
    }

    /// Births of the essential degree-`k` classes, ascending. Only defined
    /// when the filtration ends at the full torus; a truncated complex has
    /// spurious essential classes.
    pub fn essential_births(&self, k: usize) -> Result<Vec<f64>> {
        if !matches!(self.terminal, TerminalShape::Torus { .. }) {
            return Err(Error::contract(format!(
                "essential births need a filtration ending at the full torus, this one ends at {:?}",
                self.terminal
            )));
        }
        Ok(self.bars(k).filter(|b| b.is_essential()).map(|b| b.birth).collect())
    }

    /// Largest `death / birth` among finite bars of degree `k` with positive
    /// birth, or `None` if there is none.
    pub fn max_finite_ratio(&self, k: usize) -> Option<f64> {
        self.bars(k)
            .filter(|b| !b.is_essential() && b.birth > 0.0)
            .map(|b| b.death / b.birth)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
    }

    /// CSV with header `k,birth,death`; infinities are written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,birth,death\n");
        for b in self.bars.iter().filter(|b| !b.is_trivial()) {
            s.push_str(&format!("{},{},{}\n", b.k, b.birth, b.death));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "k,birth,death" => {}
            Some((i, _)) => return Err(Error::parse(i + 1, "expected header k,birth,death")),
            None => return Err(Error::parse(1, "empty diagram file")),
        }
        let mut bars = Vec::new();
        let mut max_dim = 0;
        for (i, line) in lines {
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 3 {
                return Err(Error::parse(i + 1, "expected three fields"));
            }
            let k: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad degree {:?}", fields[0])))?;
            let parse = |s: &str| -> Result<f64> {
                match s.parse::<f64>() {
                    Ok(x) if !x.is_nan() => Ok(x),
                    _ => Err(Error::parse(i + 1, format!("bad value {s:?}"))),
                }
            };
            let (birth, death) = (parse(fields[1])?, parse(fields[2])?);
            if death < birth {
                return Err(Error::parse(i + 1, "death precedes birth"));
            }
            max_dim = max_dim.max(k);
            bars.push(PersistenceBar {
                k,
                birth,
                death,
                birth_cell: None,
                death_cell: None,
            });
        }
        Ok(Self::new(max_dim, TerminalShape::Other, Provenance::custom(), bars))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: Diagram = serde_json::from_str(text)?;
        if let Some(b) = d.bars.iter().find(|b| b.birth.is_nan() || b.death.is_nan() || b.death < b.birth) {
            return Err(Error::contract(format!("invalid bar {b:?}")));
        }
        Ok(Self::new(d.max_dim, d.terminal, d.provenance, d.bars))
    }
}

/// Persistence diagram of a filtration. Cubical filtrations of the periodic
/// grid take the fast route, everything else is reduced with clearing.
pub fn reduce(f: &Filtration) -> Result<Diagram> {
    let route = match f.complex() {
        Complex::Cubical(_) => Route::Cubical,
        Complex::Simplicial(_) => Route::Twist,
    };
    reduce_with(f, route)
}

pub fn reduce_naive(f: &Filtration) -> Result<Diagram> {
    reduce_with(f, Route::Naive)
}

pub fn reduce_twist(f: &Filtration) -> Result<Diagram> {
    reduce_with(f, Route::Twist)
}

pub fn reduce_with(f: &Filtration, route: Route) -> Result<Diagram> {
    f.check_monotone()?;
    let pairing = pairing_with(f, route)?;
    Ok(Diagram::from_pairing(f, &pairing))
}

/// The raw pairing; assumes `f` is monotone.
pub fn pairing_with(f: &Filtration, route: Route) -> Result<Pairing> {
    Ok(match route {
        Route::Naive => naive_pairing(f),
        Route::Twist => twist_pairing(f),
        Route::Cubical => match f.complex() {
            Complex::Cubical(g) => cubical_pairing(f, g),
            Complex::Simplicial(_) => {
                return Err(Error::contract("the cubical route needs a periodic grid filtration"))
            }
        },
    })
}
