//! Finite hypercubic lattices with the shortest-path metric.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// A finite box in `Z^d`, open or periodic per axis.
///
/// Sites are indexed row-major over coordinates: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dims: Vec<usize>,
    boundary: Vec<Boundary>,
    strides: Vec<usize>,
    len: usize,
}

pub type SiteSet = BTreeSet<usize>;

impl Lattice {
    pub fn new(dims: &[usize], boundary: &[Boundary]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension("lattice needs at least one axis".into()));
        }
        if dims.len() != boundary.len() {
            return Err(Error::InvalidDimension(format!(
                "{} side lengths but {} boundary flags",
                dims.len(),
                boundary.len()
            )));
        }
        for (axis, (&side, &b)) in dims.iter().zip(boundary).enumerate() {
            if side == 0 {
                return Err(Error::InvalidDimension(format!("axis {axis} has side length 0")));
            }
            if b == Boundary::Periodic && side < 3 {
                return Err(Error::UnsupportedGeometry(format!(
                    "periodic axis {axis} has side {side}; periodic axes need side >= 3"
                )));
            }
        }
        let mut strides = vec![1; dims.len()];
        for axis in (0..dims.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * dims[axis + 1];
        }
        let len = dims.iter().product();
        Ok(Self { dims: dims.to_vec(), boundary: boundary.to_vec(), strides, len })
    }

    /// Open chain of `n` sites.
    pub fn chain(n: usize) -> Result<Self> {
        Self::new(&[n], &[Boundary::Open])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary
    }

    pub fn spatial_dim(&self) -> usize {
        self.dims.len()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rem = site;
        self.strides
            .iter()
            .map(|&stride| {
                let c = rem / stride;
                rem %= stride;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return Err(Error::InvalidDimension(format!(
                "coordinate has {} components, lattice has {} axes",
                coords.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for ((&c, &side), &stride) in coords.iter().zip(&self.dims).zip(&self.strides) {
            if c >= side {
                return Err(Error::SiteOutOfRange { site: c, len: side });
            }
            idx += c * stride;
        }
        Ok(idx)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.len {
            Err(Error::SiteOutOfRange { site, len: self.len })
        } else {
            Ok(())
        }
    }

    /// Site reached by displacing `site` by `offset`, or `None` if it leaves an open axis.
    pub fn translate(&self, site: usize, offset: &[i64]) -> Option<usize> {
        if offset.len() != self.dims.len() {
            return None;
        }
        let coords = self.coords(site);
        let mut out = Vec::with_capacity(coords.len());
        for axis in 0..coords.len() {
            let side = self.dims[axis] as i64;
            let c = coords[axis] as i64 + offset[axis];
            let c = match self.boundary[axis] {
                Boundary::Open if !(0..side).contains(&c) => return None,
                Boundary::Open => c,
                Boundary::Periodic => c.rem_euclid(side),
            };
            out.push(c as usize);
        }
        self.index(&out).ok()
    }

    /// Shortest-path distance, summed per axis with wrap-around on periodic axes.
    pub fn dist(&self, x: usize, y: usize) -> usize {
        let cx = self.coords(x);
        let cy = self.coords(y);
        let mut d = 0;
        for axis in 0..cx.len() {
            let direct = cx[axis].abs_diff(cy[axis]);
            d += match self.boundary[axis] {
                Boundary::Open => direct,
                Boundary::Periodic => direct.min(self.dims[axis] - direct),
            };
        }
        d
    }

    pub fn dist_to_set(&self, x: usize, set: &SiteSet) -> Option<usize> {
        set.iter().map(|&z| self.dist(x, z)).min()
    }

    /// Largest distance between two sites.
    pub fn diameter(&self) -> usize {
        self.dims
            .iter()
            .zip(&self.boundary)
            .map(|(&side, &b)| match b {
                Boundary::Open => side - 1,
                Boundary::Periodic => side / 2,
            })
            .sum()
    }

    /// Nearest-neighbour sites (distance one).
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for axis in 0..self.dims.len() {
            for step in [-1i64, 1] {
                let mut offset = vec![0i64; self.dims.len()];
                offset[axis] = step;
                if let Some(y) = self.translate(site, &offset) {
                    if y != site {
                        out.insert(y);
                    }
                }
            }
        }
        out.into_iter().collect()
    }

    /// `Z_n = {z : dist(z, Z) <= n}`.
    pub fn ball(&self, z: &SiteSet, n: usize) -> Result<SiteSet> {
        for &site in z {
            self.check_site(site)?;
        }
        Ok((0..self.len)
            .filter(|&x| self.dist_to_set(x, z).is_some_and(|d| d <= n))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_distances() {
        let open = Lattice::chain(6).unwrap();
        assert_eq!(open.len(), 6);
        assert_eq!(open.dist(0, 5), 5);
        let ring = Lattice::new(&[6], &[Boundary::Periodic]).unwrap();
        assert_eq!(ring.dist(0, 4), 2);
        assert_eq!(ring.diameter(), 3);
    }

    #[test]
    fn square_distance() {
        let sq = Lattice::new(&[3, 3], &[Boundary::Open, Boundary::Open]).unwrap();
        let a = sq.index(&[0, 0]).unwrap();
        let b = sq.index(&[2, 2]).unwrap();
        assert_eq!(sq.dist(a, b), 4);
        assert_eq!(sq.coords(5), vec![1, 2]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(Lattice::new(&[0], &[Boundary::Open]), Err(Error::InvalidDimension(_))));
        assert!(matches!(
            Lattice::new(&[2], &[Boundary::Periodic]),
            Err(Error::UnsupportedGeometry(_))
        ));
    }

    #[test]
    fn balls() {
        let open = Lattice::chain(6).unwrap();
        let z: SiteSet = [2].into();
        assert_eq!(open.ball(&z, 1).unwrap(), [1, 2, 3].into());
        assert_eq!(open.ball(&z, 0).unwrap(), z);
        let ring = Lattice::new(&[6], &[Boundary::Periodic]).unwrap();
        assert_eq!(ring.ball(&[0].into(), 2).unwrap(), [0, 1, 2, 4, 5].into());
        assert!(matches!(open.ball(&[9].into(), 1), Err(Error::SiteOutOfRange { .. })));
    }
}
