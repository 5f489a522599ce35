//! Sampled functions on uniform rectangular grids, midpoint quadrature, and
//! the ball geometry used by every supremum functional in the crate.
//!
//! A [`GridFunction`] stores one real sample per grid cell, taken at the cell
//! center. Midpoint sampling makes the quadrature of [`integrate`] exact for
//! cellwise-constant integrands, so indicator test functions whose support
//! aligns with cell boundaries integrate exactly. Ball membership of a cell is
//! decided by its center alone; partial-cell volume fractions are never used.
//!
//! [`integrate`]: GridFunction::integrate

use crate::{Error, Result};

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`, n in {1, 2}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() > 2 || lo.len() != hi.len() {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got lo={lo:?} hi={hi:?}"
            )));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(Error::InvalidGrid(format!(
                    "each axis needs finite bounds with hi > lo, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// 1-D interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// 2-D rectangle `[a0, b0] x [a1, b1]`.
    pub fn rect(a0: f64, b0: f64, a1: f64, b1: f64) -> Result<Self> {
        Self::new(vec![a0, a1], vec![b0, b1])
    }

    /// Symmetric box `[-l, l]^dim`.
    pub fn symmetric(l: f64, dim: usize) -> Result<Self> {
        Self::new(vec![-l; dim], vec![l; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(xi, (a, b))| *a <= *xi && *xi <= *b)
    }

    /// Whether the Euclidean ball lies entirely inside the box.
    pub fn contains_ball(&self, ball: &Ball) -> bool {
        ball.center.len() == self.dim()
            && ball
                .center
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(c, (a, b))| c - ball.radius >= *a && c + ball.radius <= *b)
    }
}

/// Open Euclidean ball `B(x, r)`; the localization geometry for every
/// sup-over-balls functional.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || center.len() > 2 || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball center must be a finite point in dimension 1 or 2, got {center:?}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 < self.radius * self.radius
    }

    /// Lebesgue measure of the ball: `2r` in 1-D, `pi r^2` in 2-D.
    pub fn measure(&self) -> f64 {
        match self.dim() {
            1 => 2.0 * self.radius,
            _ => std::f64::consts::PI * self.radius * self.radius,
        }
    }
}

/// Vector of per-axis integrability exponents, each finite and `>= 1`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExponentVector(Vec<f64>);

impl ExponentVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() || entries.len() > 2 {
            return Err(Error::ExponentOutOfRange(format!(
                "need 1 or 2 entries, got {}",
                entries.len()
            )));
        }
        for q in &entries {
            if !q.is_finite() || *q < 1.0 {
                return Err(Error::ExponentOutOfRange(format!(
                    "entries must be finite and >= 1, got {q}"
                )));
            }
        }
        Ok(Self(entries))
    }

    pub fn scalar(q: f64) -> Result<Self> {
        Self::new(vec![q])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    /// `sum_i 1/q_i`, the homogeneity degree of the mixed norm.
    pub fn sum_reciprocal(&self) -> f64 {
        self.0.iter().map(|q| 1.0 / q).sum()
    }

    /// Entrywise Hoelder conjugate `q_i' = q_i / (q_i - 1)`.
    ///
    /// Entries equal to 1 are rejected: the conjugate would be infinite and
    /// infinite exponents are outside the scope of this toolkit.
    pub fn conjugate(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for q in &self.0 {
            if *q <= 1.0 {
                return Err(Error::ExponentOutOfRange(format!(
                    "conjugate of exponent {q} would be infinite"
                )));
            }
            out.push(q / (q - 1.0));
        }
        Ok(Self(out))
    }
}

/// Real-valued function sampled at the cell centers of a uniform grid.
///
/// Samples are stored flat with the axis-0 index varying fastest: in 2-D the
/// cell `(i0, i1)` lives at `values[i1 * n0 + i0]`, so each fixed-`x1` row is
/// contiguous. Every stored value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: BoxDomain,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    /// Builds a grid function from raw values, validating all invariants.
    pub fn from_values(domain: BoxDomain, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if shape.len() != domain.dim() {
            return Err(Error::InvalidGrid(format!(
                "resolution rank {} does not match dimension {}",
                shape.len(),
                domain.dim()
            )));
        }
        if shape.iter().any(|n| *n < 2) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 2 cells, got {shape:?}"
            )));
        }
        let len: usize = shape.iter().product();
        if values.len() != len {
            return Err(Error::InvalidGrid(format!(
                "value count {} != product of resolution {len}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let cell = unflatten(k, &shape);
            return Err(Error::InvalidGrid(format!(
                "non-finite value {} at cell {cell:?}",
                values[k]
            )));
        }
        Ok(Self {
            domain,
            shape,
            values,
        })
    }

    /// Samples `expr` at the center of every cell (midpoint sampling).
    pub fn sample<F>(expr: F, domain: &BoxDomain, shape: &[usize]) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let probe = Self::from_values(
            domain.clone(),
            shape.to_vec(),
            vec![0.0; shape.iter().product()],
        )?;
        let mut values = vec![0.0; probe.len()];
        let mut center = vec![0.0; probe.dim()];
        for (k, slot) in values.iter_mut().enumerate() {
            let cell = unflatten(k, shape);
            for (a, i) in cell.iter().enumerate() {
                center[a] = probe.cell_center(a, *i);
            }
            let v = expr(&center);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample {
                    cell,
                    center: center.clone(),
                    value: v,
                });
            }
            *slot = v;
        }
        Self::from_values(domain.clone(), shape.to_vec(), values)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
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

    /// Grid step along `axis`.
    pub fn cell_size(&self, axis: usize) -> f64 {
        self.domain.width(axis) / self.shape[axis] as f64
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.cell_size(a)).product()
    }

    /// Center coordinate of cell `i` along `axis`.
    pub fn cell_center(&self, axis: usize, i: usize) -> f64 {
        self.domain.lo()[axis] + (i as f64 + 0.5) * self.cell_size(axis)
    }

    /// Coordinates of the center of flat cell `k`.
    pub fn center_of(&self, k: usize) -> Vec<f64> {
        let cell = unflatten(k, &self.shape);
        cell.iter()
            .enumerate()
            .map(|(a, i)| self.cell_center(a, *i))
            .collect()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Whether `other` lives on exactly the same box and resolution.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.domain == other.domain && self.shape == other.shape
    }

    /// Midpoint-rule integral over the whole box. Exact for cellwise-constant
    /// integrands and for affine ones.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Applies `f` to every sample; the result must stay finite.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let values: Vec<f64> = self.values.iter().map(|v| f(*v)).collect();
        Self::from_values(self.domain.clone(), self.shape.clone(), values)
    }

    /// Combines two functions on the same grid sample by sample.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        if !self.same_geometry(other) {
            return Err(Error::InvalidParameter(
                "zip_with requires identical box and resolution".into(),
            ));
        }
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self::from_values(self.domain.clone(), self.shape.clone(), values)
    }

    pub(crate) fn map_unchecked<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            domain: self.domain.clone(),
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            domain: self.domain.clone(),
            shape: self.shape.clone(),
            values,
        }
    }

    /// Index range `[i0, i1)` of cells along `axis` whose center satisfies
    /// `pred`, assuming the admissible set is a contiguous run inside
    /// `(xmin, xmax)`. The float seed is corrected by the exact predicate so
    /// that borderline cells are classified consistently everywhere.
    fn axis_run(
        &self,
        axis: usize,
        xmin: f64,
        xmax: f64,
        pred: impl Fn(f64) -> bool,
    ) -> (usize, usize) {
        let n = self.shape[axis];
        let h = self.cell_size(axis);
        let lo = self.domain.lo()[axis];
        let seed = |x: f64| -> usize {
            let t = (x - lo) / h - 0.5;
            t.ceil().clamp(0.0, n as f64) as usize
        };
        let inside = |i: usize| pred(self.cell_center(axis, i));
        let mut i0 = seed(xmin);
        while i0 > 0 && inside(i0 - 1) {
            i0 -= 1;
        }
        while i0 < n && !inside(i0) && self.cell_center(axis, i0) < xmax {
            i0 += 1;
        }
        let mut i1 = seed(xmax).min(n);
        while i1 < n && inside(i1) {
            i1 += 1;
        }
        while i1 > i0 && !inside(i1 - 1) {
            i1 -= 1;
        }
        (i0, i1.max(i0))
    }

    /// Visits the rows of cells whose center lies in `ball`: the callback gets
    /// `(flat start index, i0, i1)` meaning flat cells `start + i0 .. start + i1`.
    /// In 1-D there is a single row.
    pub(crate) fn ball_rows(&self, ball: &Ball, row: impl FnMut(usize, usize, usize)) {
        self.ball_rows_raw(&ball.center, ball.radius, row)
    }

    /// Allocation-free form of [`Self::ball_rows`].
    pub(crate) fn ball_rows_raw(
        &self,
        center: &[f64],
        r: f64,
        mut row: impl FnMut(usize, usize, usize),
    ) {
        match self.dim() {
            1 => {
                let x = center[0];
                let (i0, i1) = self.axis_run(0, x - r, x + r, |c| {
                    let d = c - x;
                    d * d < r * r
                });
                if i1 > i0 {
                    row(0, i0, i1);
                }
            }
            _ => {
                let (x, y) = (center[0], center[1]);
                let n0 = self.shape[0];
                let (j0, j1) = self.axis_run(1, y - r, y + r, |c| {
                    let d = c - y;
                    d * d < r * r
                });
                for j in j0..j1 {
                    let dy = self.cell_center(1, j) - y;
                    let (i0, i1) = self.axis_run(0, x - r, x + r, |c| {
                        let dx = c - x;
                        dx * dx + dy * dy < r * r
                    });
                    if i1 > i0 {
                        row(j * n0, i0, i1);
                    }
                }
            }
        }
    }

    /// Number of cell centers inside the ball.
    pub fn cells_in_ball(&self, ball: &Ball) -> usize {
        let mut count = 0;
        self.ball_rows(ball, |_, i0, i1| count += i1 - i0);
        count
    }

    /// Measure of the region covered by the cells whose center lies in the
    /// ball: cell count times cell volume. For balls well inside the box this
    /// approximates the ball measure; near the boundary it is the measure of
    /// the in-box portion.
    pub fn covered_measure(&self, ball: &Ball) -> f64 {
        self.cells_in_ball(ball) as f64 * self.cell_volume()
    }

    /// Mean of the samples over the cells inside `ball`, or `None` when no
    /// cell center falls in the ball.
    pub fn ball_mean(&self, ball: &Ball) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        self.ball_rows(ball, |start, i0, i1| {
            for k in start + i0..start + i1 {
                sum += self.values[k];
            }
            count += i1 - i0;
        });
        (count > 0).then(|| sum / count as f64)
    }

    /// Restriction `f * chi_B`: equal to `f` on cells whose center lies in
    /// `B`, zero elsewhere, on the same grid.
    pub fn restrict(&self, ball: &Ball) -> Result<Self> {
        if ball.dim() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "ball dimension {} != grid dimension {}",
                ball.dim(),
                self.dim()
            )));
        }
        let mut values = vec![0.0; self.values.len()];
        let mut count = 0usize;
        self.ball_rows(ball, |start, i0, i1| {
            values[start + i0..start + i1].copy_from_slice(&self.values[start + i0..start + i1]);
            count += i1 - i0;
        });
        if count == 0 {
            return Err(Error::EmptySupport {
                center: ball.center.clone(),
                radius: ball.radius,
            });
        }
        Ok(self.with_values(values))
    }

    /// Returns `g(x) = f(lambda (x - tau))` represented on the transformed
    /// box `tau + box/lambda` at the same resolution. Cell centers map onto
    /// cell centers, so the sample values are carried over exactly.
    pub fn dilate_translate(&self, lambda: f64, tau: &[f64]) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive and finite, got {lambda}"
            )));
        }
        if tau.len() != self.dim() || tau.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "translation must be a finite point of dimension {}, got {tau:?}",
                self.dim()
            )));
        }
        let lo: Vec<f64> = self
            .domain
            .lo()
            .iter()
            .zip(tau)
            .map(|(a, t)| a / lambda + t)
            .collect();
        let hi: Vec<f64> = self
            .domain
            .hi()
            .iter()
            .zip(tau)
            .map(|(b, t)| b / lambda + t)
            .collect();
        Ok(Self {
            domain: BoxDomain::new(lo, hi)?,
            shape: self.shape.clone(),
            values: self.values.clone(),
        })
    }
}

fn unflatten(mut k: usize, shape: &[usize]) -> Vec<usize> {
    let mut cell = Vec::with_capacity(shape.len());
    for n in shape {
        cell.push(k % n);
        k /= n;
    }
    cell
}

/// Successive quadrature differences `|I_N - I_2N|` for a refinement ladder
/// starting at `shape`, doubling every axis `levels` times. A diagnostic for
/// choosing resolutions: for continuous integrands the deltas shrink.
pub fn refinement_deltas<F>(
    expr: F,
    domain: &BoxDomain,
    shape: &[usize],
    levels: usize,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut out = Vec::with_capacity(levels);
    let mut shape: Vec<usize> = shape.to_vec();
    let mut prev = GridFunction::sample(&expr, domain, &shape)?.integrate();
    for _ in 0..levels {
        shape.iter_mut().for_each(|n| *n *= 2);
        let next = GridFunction::sample(&expr, domain, &shape)?.integrate();
        out.push((next - prev).abs());
        prev = next;
    }
    Ok(out)
}

pub mod io {
    //! Binary serialization of [`GridFunction`].
    //!
    //! Layout (all integers and floats little-endian):
    //!
    //! ```text
    //! magic   4 bytes  b"GFN1"
    //! dim     1 byte   u8, 1 or 2
    //! per axis, in axis order:
    //!   lo    8 bytes  f64
    //!   hi    8 bytes  f64
    //!   n     8 bytes  u64  (cell count along the axis)
    //! values  8*prod(n) bytes, f64, flat order with axis 0 fastest
    //! ```
    //!
    //! The byte stream is a pure function of the grid data, so re-serializing
    //! an unchanged function reproduces the file bit for bit.

    use super::{BoxDomain, GridFunction};
    use crate::{Error, Result};
    use std::io::{Read, Write};

    const MAGIC: &[u8; 4] = b"GFN1";

    pub fn write_grid<W: Write>(f: &GridFunction, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[f.dim() as u8])?;
        for a in 0..f.dim() {
            w.write_all(&f.domain().lo()[a].to_le_bytes())?;
            w.write_all(&f.domain().hi()[a].to_le_bytes())?;
            w.write_all(&(f.shape()[a] as u64).to_le_bytes())?;
        }
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_grid<R: Read>(mut r: R) -> Result<GridFunction> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {magic:?}, expected {MAGIC:?}"
            )));
        }
        let mut dim = [0u8; 1];
        r.read_exact(&mut dim)?;
        let dim = dim[0] as usize;
        if dim == 0 || dim > 2 {
            return Err(Error::Format(format!("unsupported dimension {dim}")));
        }
        let mut f64buf = [0u8; 8];
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        let mut shape = Vec::with_capacity(dim);
        for _ in 0..dim {
            lo.push(read_f64(&mut r)?);
            hi.push(read_f64(&mut r)?);
            let mut nbuf = [0u8; 8];
            r.read_exact(&mut nbuf)?;
            let n = u64::from_le_bytes(nbuf);
            if n > (1 << 32) {
                return Err(Error::Format(format!("implausible axis size {n}")));
            }
            shape.push(n as usize);
        }
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(read_f64(&mut r)?);
        }
        GridFunction::from_values(BoxDomain::new(lo, hi)?, shape, values)
    }

    pub fn save(f: &GridFunction, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        write_grid(f, std::io::BufWriter::new(file))
    }

    pub fn load(path: &std::path::Path) -> Result<GridFunction> {
        let file = std::fs::File::open(path)?;
        read_grid(std::io::BufReader::new(file))
    }
}
