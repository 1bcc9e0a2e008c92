//! Per-pair matrix databases and their generation from a catalog.

use rayon::prelude::*;

use crate::dvmatrix::{augment_for_stay, build_porkchop, stay_adjust, wait_adjust, DvMatrix, GridSpec, MatrixError};
use crate::ephemeris::Catalog;
use crate::lambert::LambertConfig;

/// Adjustments applied to every raw pork-chop matrix, in this order:
/// augmentation, stay shift, wait adjustment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjustments {
    /// Stay time in grid steps.
    pub stay_steps: usize,
    /// Pad the grid so the stay shift loses no entry.
    pub augment: bool,
    pub wait: bool,
}

impl Default for Adjustments {
    fn default() -> Self {
        Self {
            stay_steps: 0,
            augment: false,
            wait: true,
        }
    }
}

impl Adjustments {
    pub fn apply(&self, m: &DvMatrix) -> Result<DvMatrix, MatrixError> {
        let mut out = if self.augment {
            augment_for_stay(m, self.stay_steps)
        } else {
            m.clone()
        };
        if self.stay_steps > 0 {
            out = stay_adjust(&out, self.stay_steps);
        }
        if self.wait {
            out = wait_adjust(&out)?;
        }
        Ok(out)
    }
}

/// Single-leg matrices for the ordered pairs of a set of objects, all on
/// one grid. Pairs without a matrix behave as all-infinite.
#[derive(Debug, Clone)]
pub struct MatrixSet {
    spec: GridSpec,
    ids: Vec<String>,
    // ids.len()² slots, row = departure object
    mats: Vec<Option<DvMatrix>>,
}

impl MatrixSet {
    pub fn new<S: AsRef<str>>(spec: GridSpec, ids: &[S]) -> Result<Self, MatrixError> {
        spec.validate()?;
        let ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
        for (k, id) in ids.iter().enumerate() {
            if ids[..k].contains(id) {
                return Err(MatrixError::InvalidSpec(format!("object `{id}` listed twice")));
            }
        }
        let n = ids.len();
        Ok(Self {
            spec,
            ids,
            mats: vec![None; n * n],
        })
    }

    /// Collects single-leg matrices; the object list is the sorted set of
    /// their labels.
    pub fn from_matrices(mats: Vec<DvMatrix>) -> Result<Self, MatrixError> {
        let first = mats.first().ok_or_else(|| MatrixError::InvalidSpec("no matrices".into()))?;
        let spec = *first.spec();
        let mut ids: Vec<String> = mats.iter().flat_map(|m| m.labels().iter().cloned()).collect();
        ids.sort();
        ids.dedup();
        let mut set = Self::new(spec, &ids)?;
        for m in mats {
            set.insert(m)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, m: DvMatrix) -> Result<(), MatrixError> {
        if *m.spec() != self.spec {
            return Err(MatrixError::SpecMismatch);
        }
        if m.leg_count() != 1 {
            return Err(MatrixError::InvalidSpec(format!(
                "expected a single-leg matrix, got {} legs",
                m.leg_count()
            )));
        }
        let (a, b) = (&m.labels()[0], &m.labels()[1]);
        if a == b {
            return Err(MatrixError::SameObject(a.clone()));
        }
        let slot = self.slot(self.require(a)?, self.require(b)?);
        self.mats[slot] = Some(m);
        Ok(())
    }

    fn require(&self, id: &str) -> Result<usize, MatrixError> {
        self.index_of(id)
            .ok_or_else(|| MatrixError::InvalidSpec(format!("object `{id}` is not part of the set")))
    }

    fn slot(&self, from: usize, to: usize) -> usize {
        from * self.ids.len() + to
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Matrix for the ordered pair of object indices, if one was supplied.
    pub fn get(&self, from: usize, to: usize) -> Option<&DvMatrix> {
        self.mats[self.slot(from, to)].as_ref()
    }

    pub fn get_by_id(&self, from: &str, to: &str) -> Option<&DvMatrix> {
        self.get(self.index_of(from)?, self.index_of(to)?)
    }

    /// The pair's matrix, or an all-infinite one when it is missing.
    pub fn get_or_infinite(&self, from: usize, to: usize) -> DvMatrix {
        self.get(from, to).cloned().unwrap_or_else(|| {
            DvMatrix::infinite(self.spec, &[&self.ids[from], &self.ids[to]]).expect("valid spec and labels")
        })
    }

    pub fn matrices(&self) -> impl Iterator<Item = &DvMatrix> {
        self.mats.iter().flatten()
    }

    /// Applies `f` to every stored matrix. All results must share one grid.
    pub fn try_map<F>(&self, f: F) -> Result<Self, MatrixError>
    where
        F: Fn(&DvMatrix) -> Result<DvMatrix, MatrixError> + Sync,
    {
        let mapped: Vec<Option<DvMatrix>> = self
            .mats
            .par_iter()
            .map(|m| m.as_ref().map(&f).transpose())
            .collect::<Result<_, _>>()?;
        let spec = match mapped.iter().flatten().next() {
            Some(m) => *m.spec(),
            None => self.spec,
        };
        if mapped.iter().flatten().any(|m| *m.spec() != spec) {
            return Err(MatrixError::SpecMismatch);
        }
        Ok(Self {
            spec,
            ids: self.ids.clone(),
            mats: mapped,
        })
    }

    /// Rendezvous matrices for every ordered pair of `ids`, adjusted.
    /// Work is spread over the current rayon pool.
    pub fn generate<S: AsRef<str> + Sync>(
        catalog: &Catalog,
        ids: &[S],
        spec: &GridSpec,
        lambert: &LambertConfig,
        adjust: &Adjustments,
    ) -> Result<Self, MatrixError> {
        let raw = Self::new(*spec, ids)?;
        let n = raw.len();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let built: Vec<DvMatrix> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let m = build_porkchop(catalog, &raw.ids[a], &raw.ids[b], spec, lambert)?;
                adjust.apply(&m)
            })
            .collect::<Result<_, _>>()?;
        let out_spec = built.first().map_or(*spec, |m| *m.spec());
        let mut set = Self::new(out_spec, &raw.ids)?;
        for m in built {
            set.insert(m)?;
        }
        Ok(set)
    }

    /// Restriction to a subset of the objects, in the given order.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Self, MatrixError> {
        let idx: Vec<usize> = ids.iter().map(|s| self.require(s.as_ref())).collect::<Result<_, _>>()?;
        let mut out = Self::new(self.spec, ids)?;
        for (a2, &a) in idx.iter().enumerate() {
            for (b2, &b) in idx.iter().enumerate() {
                let slot = out.slot(a2, b2);
                out.mats[slot] = self.get(a, b).cloned();
            }
        }
        Ok(out)
    }
}
