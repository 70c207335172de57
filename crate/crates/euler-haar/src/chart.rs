//! Euler charts: named parameter lists with an evaluation map into a matrix
//! group and the density (Jacobian) weight of the Haar measure in those
//! coordinates, up to one global constant per chart.

use std::sync::Arc;

use crate::kak::{GroupSpec, RegionSpec};
use crate::linalg::CMat;
use crate::{Error, Result};

/// One chart parameter with its closed interval domain.
#[derive(Clone, Debug)]
pub struct ChartParam {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl ChartParam {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), lo, hi }
    }
}

type EvalFn = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;
type WeightFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MapFn = Arc<dyn Fn(&[f64]) -> (Vec<f64>, f64) + Send + Sync>;

/// A generalized Euler-angle chart.
///
/// `evaluate` is defined for arbitrary parameter values (the product of
/// exponentials makes sense everywhere); the stated domain governs
/// integration and the checked entry point. For charts whose radial block
/// is constrained to a region 𝒜 rather than a box, `region_block` names the
/// parameter sub-range and the region, and `from_unit` maps the unit cube
/// onto the true domain with the appropriate Jacobian factor.
#[derive(Clone)]
pub struct EulerChart {
    pub name: String,
    pub params: Vec<ChartParam>,
    pub group: Arc<GroupSpec>,
    pub region_block: Option<(usize, RegionSpec)>,
    eval: EvalFn,
    weight: WeightFn,
    map: Option<MapFn>,
}

impl std::fmt::Debug for EulerChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EulerChart")
            .field("name", &self.name)
            .field("dim", &self.params.len())
            .field("group", &self.group.name)
            .finish()
    }
}

impl EulerChart {
    pub fn new(
        name: impl Into<String>,
        params: Vec<ChartParam>,
        group: Arc<GroupSpec>,
        eval: EvalFn,
        weight: WeightFn,
    ) -> Self {
        Self {
            name: name.into(),
            params,
            group,
            region_block: None,
            eval,
            weight,
            map: None,
        }
    }

    /// Attach a radial region over params [start, start+region.dim) and a
    /// unit-cube domain map covering the whole parameter vector.
    pub fn with_region(mut self, start: usize, region: RegionSpec, map: MapFn) -> Self {
        self.region_block = Some((start, region));
        self.map = Some(map);
        self
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    /// The group element at the given parameters, no domain check.
    pub fn evaluate(&self, p: &[f64]) -> CMat {
        (self.eval)(p)
    }

    /// The group element after validating the parameter domain.
    pub fn evaluate_checked(&self, p: &[f64]) -> Result<CMat> {
        self.check_domain(p)?;
        Ok((self.eval)(p))
    }

    /// Haar density factor in these coordinates, excluding the global
    /// constant.
    pub fn jacobian_weight(&self, p: &[f64]) -> f64 {
        (self.weight)(p)
    }

    pub fn check_domain(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "chart {} expects {} parameters, got {}",
                self.name,
                self.dim(),
                p.len()
            )));
        }
        let (rs, re) = match &self.region_block {
            Some((start, region)) => (*start, *start + region.dim),
            None => (0, 0),
        };
        for (i, (v, param)) in p.iter().zip(&self.params).enumerate() {
            if i >= rs && i < re {
                continue;
            }
            if *v < param.lo - 1e-12 || *v > param.hi + 1e-12 {
                return Err(Error::Domain(format!(
                    "parameter {} = {v} outside [{}, {}]",
                    param.name, param.lo, param.hi
                )));
            }
        }
        if let Some((start, region)) = &self.region_block {
            let block = &p[*start..*start + region.dim];
            if !region.contains(block, 1e-12) {
                return Err(Error::Region(format!(
                    "radial block {block:?} outside region of chart {}",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Map a unit-cube point to chart parameters, returning the Jacobian of
    /// the map (the box volume for plain charts).
    pub fn from_unit(&self, u: &[f64]) -> (Vec<f64>, f64) {
        match &self.map {
            Some(map) => map(u),
            None => {
                let mut jac = 1.0;
                let p = u
                    .iter()
                    .zip(&self.params)
                    .map(|(ui, param)| {
                        jac *= param.hi - param.lo;
                        param.lo + (param.hi - param.lo) * ui
                    })
                    .collect();
                (p, jac)
            }
        }
    }

    /// Distance from the domain boundary, measured per-axis for box
    /// parameters and as constraint slack inside the region block.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        let (rs, re) = match &self.region_block {
            Some((start, region)) => (*start, *start + region.dim),
            None => (0, 0),
        };
        let mut dist = f64::INFINITY;
        for (i, (v, param)) in p.iter().zip(&self.params).enumerate() {
            if i >= rs && i < re {
                continue;
            }
            dist = dist.min(v - param.lo).min(param.hi - v);
        }
        if let Some((start, region)) = &self.region_block {
            dist = dist.min(region.interior_slack(&p[*start..*start + region.dim]));
        }
        dist
    }

    /// Draw a parameter point at least `margin` (in unit-cube coordinates)
    /// away from every boundary facet.
    pub fn sample_interior<R: rand::Rng>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        let u: Vec<f64> = (0..self.dim())
            .map(|_| margin + (1.0 - 2.0 * margin) * rng.gen::<f64>())
            .collect();
        self.from_unit(&u).0
    }

    /// Product of exponentials evaluated at all-zero parameters must be the
    /// identity; exposed for tests.
    pub fn identity_at_origin_defect(&self) -> f64 {
        let p = vec![0.0; self.dim()];
        crate::linalg::max_abs(&(self.evaluate(&p) - crate::linalg::eye(self.group.matrix_dim)))
    }
}
