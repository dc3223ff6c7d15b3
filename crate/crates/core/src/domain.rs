//! Domains and points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// The three model domains. `Ball(1)` and `Polydisc(1)` are the disc and are
/// normalized to [`Domain::Disc`] by the constructors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Disc,
    Ball(usize),
    Polydisc(usize),
}

impl Domain {
    pub fn ball(m: usize) -> Self {
        if m == 1 {
            Domain::Disc
        } else {
            Domain::Ball(m)
        }
    }

    pub fn polydisc(m: usize) -> Self {
        if m == 1 {
            Domain::Disc
        } else {
            Domain::Polydisc(m)
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Disc => 1,
            Domain::Ball(m) | Domain::Polydisc(m) => m,
        }
    }

    /// Distance from `z` to the boundary, measured in the sense used for
    /// contour radii: `1 - |z|` for the disc and ball, `min(1 - |z_i|)` for
    /// the polydisc. Non-positive outside the domain.
    pub fn boundary_distance(&self, z: &[C64]) -> f64 {
        match self {
            Domain::Disc | Domain::Ball(_) => 1.0 - z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Domain::Polydisc(_) => z.iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        z.len() == self.dim() && z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) && self.boundary_distance(z) > 0.0
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Disc => write!(f, "unit disc"),
            Domain::Ball(m) => write!(f, "unit ball in C^{m}"),
            Domain::Polydisc(m) => write!(f, "polydisc D^{m}"),
        }
    }
}

/// A point strictly inside one of the model domains.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainPoint {
    coords: Vec<C64>,
    domain: Domain,
}

impl DomainPoint {
    pub fn new(domain: Domain, coords: Vec<C64>) -> Result<Self> {
        if !domain.contains(&coords) {
            return Err(Error::PointOutsideDomain {
                coords: fmt_coords(&coords),
                domain: domain.to_string(),
            });
        }
        Ok(DomainPoint { coords, domain })
    }

    pub fn disc(z: C64) -> Result<Self> {
        Self::new(Domain::Disc, vec![z])
    }

    /// Disc point from real and imaginary parts.
    pub fn disc_xy(re: f64, im: f64) -> Result<Self> {
        Self::disc(C64::new(re, im))
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// First coordinate; the whole point on the disc.
    pub fn z(&self) -> C64 {
        self.coords[0]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn origin(domain: Domain) -> Self {
        DomainPoint {
            coords: vec![C64::new(0.0, 0.0); domain.dim()],
            domain,
        }
    }
}

impl fmt::Display for DomainPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_coords(&self.coords))
    }
}

pub(crate) fn fmt_coords(z: &[C64]) -> String {
    let parts: Vec<String> = z.iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect();
    format!("({})", parts.join(", "))
}
