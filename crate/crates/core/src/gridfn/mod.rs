//! Sampled functions on uniform lattices with zero extension, and L^p norms.

mod generators;
mod io;

pub use generators::{Generator, GridBox};
pub use io::{read_text, to_csv, write_text};

use crate::error::{parse_err, precondition, Error, Result};

/// L^p exponent, `1 <= p < inf` or `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(LpExponent::Infinity)
        } else {
            precondition(format!("L^p exponent must satisfy p >= 1, got {p}"))
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "Inf" => Ok(LpExponent::Infinity),
            t => match t.parse::<f64>() {
                Ok(p) => LpExponent::finite(p),
                Err(_) => parse_err(format!("bad exponent `{t}`")),
            },
        }
    }

    /// The exponent as a real number, `inf` for the sup norm.
    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, LpExponent::Finite(_))
    }
}

impl std::fmt::Display for LpExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpExponent::Finite(p) => write!(f, "{p}"),
            LpExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Accumulates `sum |v|^p` (or `max |v|`) with fast paths for p = 1, 2.
#[derive(Debug, Clone, Copy)]
pub(crate) enum LpAccum {
    One,
    Two,
    General(f64),
    Max,
}

impl LpAccum {
    pub(crate) fn new(p: LpExponent) -> Self {
        match p {
            LpExponent::Finite(p) if p == 1.0 => LpAccum::One,
            LpExponent::Finite(p) if p == 2.0 => LpAccum::Two,
            LpExponent::Finite(p) => LpAccum::General(p),
            LpExponent::Infinity => LpAccum::Max,
        }
    }

    #[inline]
    pub(crate) fn term(self, acc: f64, v: f64) -> f64 {
        match self {
            LpAccum::One => acc + v.abs(),
            LpAccum::Two => acc + v * v,
            LpAccum::General(p) => acc + v.abs().powf(p),
            LpAccum::Max => acc.max(v.abs()),
        }
    }

    /// Turns the accumulated sum into the norm; `cell` is the cell volume.
    pub(crate) fn finish(self, acc: f64, cell: f64) -> f64 {
        match self {
            LpAccum::One => cell * acc,
            LpAccum::Two => (cell * acc).sqrt(),
            LpAccum::General(p) => (cell * acc).powf(1.0 / p),
            LpAccum::Max => acc,
        }
    }
}

/// A real function sampled on `origin + i * spacing`, zero outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
    // Per axis, the first and last index of a nonzero slab; None if f == 0.
    support: Option<Vec<(usize, usize)>>,
}

impl GridFunction {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let dim = origin.len();
        if !(1..=3).contains(&dim) || shape.len() != dim {
            return precondition(format!(
                "dimension must be 1..=3 with matching shape, got origin {dim}, shape {}",
                shape.len()
            ));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return precondition(format!("spacing must be positive, got {spacing}"));
        }
        if shape.iter().any(|&n| n < 2) {
            return precondition("every axis needs at least 2 samples");
        }
        let total: usize = shape.iter().product();
        if values.len() != total {
            return precondition(format!("expected {total} values, got {}", values.len()));
        }
        if origin.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return precondition("values and origin must be finite");
        }
        let support = support_bounds(&shape, &values);
        Ok(GridFunction {
            origin,
            spacing,
            shape,
            values,
            support,
        })
    }

    /// Samples `gen` on `bx`, checking the zero margin of `margin` length units.
    pub fn sample(gen: &Generator, bx: &GridBox, spacing: f64, margin: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return precondition(format!("spacing must be positive, got {spacing}"));
        }
        if gen.dim() != bx.dim() {
            return precondition(format!(
                "generator is {}-dimensional but the box is {}-dimensional",
                gen.dim(),
                bx.dim()
            ));
        }
        let mut shape = Vec::with_capacity(bx.dim());
        for (lo, hi) in bx.lo.iter().zip(&bx.hi) {
            let cells = (hi - lo) / spacing;
            let n = cells.round();
            if (cells - n).abs() > 1e-6 * cells.max(1.0) || n < 1.0 {
                return precondition(format!(
                    "spacing {spacing} does not divide the extent {}",
                    hi - lo
                ));
            }
            shape.push(n as usize + 1);
        }
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; bx.dim()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..bx.dim()).rev() {
                x[d] = bx.lo[d] + (rem % shape[d]) as f64 * spacing;
                rem /= shape[d];
            }
            values.push(gen.eval(&x));
        }
        let f = GridFunction::new(bx.lo.clone(), spacing, shape, values)?;
        let need = (margin / spacing - 1e-9).ceil().max(0.0) as usize;
        f.check_margin(need)?;
        if let Some((lo, hi)) = gen.support() {
            for d in 0..bx.dim() {
                if lo[d] < bx.lo[d] || hi[d] > bx.hi[d] {
                    return precondition(format!(
                        "generator support [{}, {}] overflows the box [{}, {}] on axis {d}",
                        lo[d], hi[d], bx.lo[d], bx.hi[d]
                    ));
                }
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Index ranges (inclusive) of nonzero samples per axis.
    pub fn support_indices(&self) -> Option<&[(usize, usize)]> {
        self.support.as_deref()
    }

    /// Number of zero samples before and after the support on each axis.
    pub fn margins(&self) -> Vec<(usize, usize)> {
        match &self.support {
            None => self.shape.iter().map(|&n| (n, n)).collect(),
            Some(b) => b
                .iter()
                .zip(&self.shape)
                .map(|(&(lo, hi), &n)| (lo, n - 1 - hi))
                .collect(),
        }
    }

    pub fn check_margin(&self, samples: usize) -> Result<()> {
        for (axis, (a, b)) in self.margins().into_iter().enumerate() {
            let available = a.min(b);
            if available < samples {
                return Err(Error::Margin {
                    axis,
                    needed: samples,
                    available,
                });
            }
        }
        Ok(())
    }

    /// Euclidean diameter of the bounding box of the support, in length units.
    pub fn support_diameter(&self) -> f64 {
        match &self.support {
            None => 0.0,
            Some(b) => {
                let s2: f64 = b.iter().map(|&(lo, hi)| ((hi - lo) as f64).powi(2)).sum();
                s2.sqrt() * self.spacing
            }
        }
    }

    /// Coordinates of sample `index` (flat, row-major).
    pub fn coordinate(&self, index: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        let mut rem = index;
        for d in (0..self.dim()).rev() {
            x[d] = self.origin[d] + (rem % self.shape[d]) as f64 * self.spacing;
            rem /= self.shape[d];
        }
        x
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        GridFunction::new(
            self.origin.clone(),
            self.spacing,
            self.shape.clone(),
            self.values.iter().map(|v| c * v).collect(),
        )
    }

    /// Row-major strides.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for d in (0..self.dim().saturating_sub(1)).rev() {
            s[d] = s[d + 1] * self.shape[d + 1];
        }
        s
    }

    /// Integer offset of `other`'s origin in units of this lattice, if aligned.
    fn lattice_offset(&self, other: &GridFunction) -> Result<Vec<i64>> {
        if self.dim() != other.dim() {
            return Err(Error::Lattice("dimensions differ".into()));
        }
        if (self.spacing - other.spacing).abs() > 1e-12 * self.spacing {
            return Err(Error::Lattice(format!(
                "spacings differ: {} vs {}",
                self.spacing, other.spacing
            )));
        }
        let mut off = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let k = (other.origin[d] - self.origin[d]) / self.spacing;
            if (k - k.round()).abs() > 1e-6 {
                return Err(Error::Lattice(format!(
                    "origins differ by a non-lattice vector on axis {d}"
                )));
            }
            off.push(k.round() as i64);
        }
        Ok(off)
    }

    /// Value at integer lattice coordinates relative to this origin, 0 outside.
    fn value_at(&self, idx: &[i64]) -> f64 {
        let mut flat = 0usize;
        for d in 0..self.dim() {
            if idx[d] < 0 || idx[d] >= self.shape[d] as i64 {
                return 0.0;
            }
            flat = flat * self.shape[d] + idx[d] as usize;
        }
        self.values[flat]
    }

    /// Restriction to a coarser lattice whose spacing is an integer multiple of this one.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return precondition("subsample factor must be positive");
        }
        let shape: Vec<usize> = self.shape.iter().map(|&n| (n - 1) / factor + 1).collect();
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0i64; self.dim()];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..self.dim()).rev() {
                idx[d] = ((rem % shape[d]) * factor) as i64;
                rem /= shape[d];
            }
            values.push(self.value_at(&idx));
        }
        GridFunction::new(self.origin.clone(), self.spacing * factor as f64, shape, values)
    }
}

fn support_bounds(shape: &[usize], values: &[f64]) -> Option<Vec<(usize, usize)>> {
    let dim = shape.len();
    let mut bounds = vec![(usize::MAX, 0usize); dim];
    let mut any = false;
    let mut idx = vec![0usize; dim];
    for (flat, v) in values.iter().enumerate() {
        if *v != 0.0 {
            any = true;
            let mut rem = flat;
            for d in (0..dim).rev() {
                idx[d] = rem % shape[d];
                rem /= shape[d];
            }
            for d in 0..dim {
                bounds[d].0 = bounds[d].0.min(idx[d]);
                bounds[d].1 = bounds[d].1.max(idx[d]);
            }
        }
    }
    any.then_some(bounds)
}

/// Rectangle-rule L^p norm.
pub fn lp_norm(f: &GridFunction, p: LpExponent) -> f64 {
    let acc = LpAccum::new(p);
    let s = f.values.iter().fold(0.0, |a, &v| acc.term(a, v));
    acc.finish(s, f.cell_volume())
}

/// L^p norm of `f - g` over the lattice points inside `region`.
///
/// Both functions are read through their zero extension, so the region may exceed
/// either box.
pub fn lp_distance(f: &GridFunction, g: &GridFunction, p: LpExponent, region: &GridBox) -> Result<f64> {
    let off = f.lattice_offset(g)?;
    if region.dim() != f.dim() {
        return precondition("region dimension differs from the functions");
    }
    let h = f.spacing;
    let mut lo = Vec::new();
    let mut n = Vec::new();
    for d in 0..f.dim() {
        let a = ((region.lo[d] - f.origin[d]) / h - 1e-9).ceil() as i64;
        let b = ((region.hi[d] - f.origin[d]) / h + 1e-9).floor() as i64;
        if b < a {
            return Ok(0.0);
        }
        lo.push(a);
        n.push((b - a + 1) as usize);
    }
    let acc = LpAccum::new(p);
    let total: usize = n.iter().product();
    let mut idx = vec![0i64; f.dim()];
    let mut gidx = vec![0i64; f.dim()];
    let mut s = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        for d in (0..f.dim()).rev() {
            idx[d] = lo[d] + (rem % n[d]) as i64;
            gidx[d] = idx[d] - off[d];
            rem /= n[d];
        }
        s = acc.term(s, f.value_at(&idx) - g.value_at(&gidx));
    }
    Ok(acc.finish(s, f.cell_volume()))
}

/// L^p norm of `f` over the lattice points inside `region`.
pub fn lp_norm_on(f: &GridFunction, p: LpExponent, region: &GridBox) -> Result<f64> {
    let zero = GridFunction {
        origin: f.origin.clone(),
        spacing: f.spacing,
        shape: vec![2; f.dim()],
        values: vec![0.0; 1 << f.dim()],
        support: None,
    };
    lp_distance(f, &zero, p, region)
}
