//! Zonotopes in generator representation, `{ sum_i c_i g_i : |c_i| <= 1 }`.
//!
//! Volumes use the determinant-sum identity
//! `vol = 2^n * sum_{|S| = n} |det(g_S)|`, either by direct enumeration, by an
//! angle-sorted prefix sum in the plane, or incrementally through
//! [`VolumeAccumulator`], which keeps the cofactor vectors of every
//! `(n-1)`-subset so that absorbing a generator never re-enumerates
//! `n`-subsets.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest number of `n`-subsets the enumeration path will visit.
pub const ENUMERATION_CAP: f64 = 5.0e6;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorZonotope {
    n: usize,
    /// Row-major, one generator per row.
    data: Vec<f64>,
    scale: f64,
}

impl GeneratorZonotope {
    pub fn new(n: usize, generators: &[Vec<f64>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("zonotope dimension must be at least 1".into()));
        }
        let mut data = Vec::with_capacity(n * generators.len());
        for g in generators {
            if g.len() != n {
                return Err(Error::Dimension(format!("generator of length {} in dimension {n}", g.len())));
            }
            data.extend_from_slice(g);
        }
        Self::from_flat(n, data)
    }

    /// Generators stored back to back in `data`.
    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("zonotope dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(n) {
            return Err(Error::Dimension(format!("{} values do not split into generators of length {n}", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("generators must be finite".into()));
        }
        Ok(Self { n, data, scale: 1.0 })
    }

    /// The same zonotope with every generator multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { scale: self.scale * factor, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Unscaled generators.
    pub fn raw_generators(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    /// Generators with the scale applied.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        self.raw_generators()
            .map(|g| g.iter().map(|v| v * self.scale).collect())
            .collect()
    }

    /// Zonotope made of the first `count` generators.
    pub fn prefix(&self, count: usize) -> Self {
        let count = count.min(self.len());
        Self { n: self.n, data: self.data[..count * self.n].to_vec(), scale: self.scale }
    }

    /// Half-widths of the axis-aligned bounding box.
    pub fn bounding_box(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        for g in self.raw_generators() {
            for (wk, gk) in w.iter_mut().zip(g) {
                *wk += gk.abs();
            }
        }
        w.iter().map(|v| v * self.scale.abs()).collect()
    }

    /// Exact volume. Uses a closed-form sum for `n <= 2` and enumeration of
    /// `n`-subsets otherwise (capped at [`ENUMERATION_CAP`] subsets).
    pub fn volume_exact(&self) -> Result<f64> {
        let raw = match self.n {
            1 => 2.0 * self.data.iter().map(|v| v.abs()).sum::<f64>(),
            2 => planar_volume(&self.data),
            _ => return self.volume_by_enumeration(),
        };
        Ok(raw * self.scale.abs().powi(self.n as i32))
    }

    /// `2^n * sum_{|S| = n} |det(g_S)|` by explicit enumeration.
    pub fn volume_by_enumeration(&self) -> Result<f64> {
        let (n, count) = (self.n, self.len());
        if count < n {
            return Ok(0.0);
        }
        let subsets = binomial(count, n);
        if subsets > ENUMERATION_CAP {
            return Err(Error::Resource(format!(
                "volume enumeration needs C({count}, {n}) = {subsets:.3e} determinants (cap {ENUMERATION_CAP:.0e}); \
                 use the incremental accumulator or a larger sampling period"
            )));
        }
        // parallel over the first index; partial sums are combined in index order
        let partials: Vec<f64> = (0..=count - n)
            .into_par_iter()
            .map(|first| {
                let mut cols = vec![0.0; n * n];
                let mut scratch = vec![0.0; n * n];
                cols[..n].copy_from_slice(self.gen(first));
                let mut acc = 0.0;
                for_each_combination(count - first - 1, n - 1, |rest| {
                    for (k, &j) in rest.iter().enumerate() {
                        cols[(k + 1) * n..(k + 2) * n].copy_from_slice(self.gen(first + 1 + j));
                    }
                    scratch.copy_from_slice(&cols);
                    acc += determinant_in_place(&mut scratch, n).abs();
                });
                acc
            })
            .collect();
        let total: f64 = partials.iter().sum();
        Ok(2f64.powi(n as i32) * total * self.scale.abs().powi(n as i32))
    }

    fn gen(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Support function `h(d) = sum_i |d . g_i|`.
    pub fn support(&self, d: &[f64]) -> Result<f64> {
        self.check_dim(d)?;
        if d.iter().all(|&v| v == 0.0) {
            return Err(Error::Parameter("support direction must be non-zero".into()));
        }
        Ok(self.raw_support(d) * self.scale.abs())
    }

    fn raw_support(&self, d: &[f64]) -> f64 {
        self.raw_generators().map(|g| dot(g, d).abs()).sum()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("vector of length {} in dimension {}", x.len(), self.n)));
        }
        Ok(())
    }

    /// Membership up to `tol` in Euclidean distance. `tol` defaults to
    /// `1e-8 * (1 + ||x||)`.
    pub fn contains(&self, x: &[f64], tol: Option<f64>) -> Result<bool> {
        let tol = tol.unwrap_or_else(|| default_tolerance(x));
        Ok(self.project(x, tol, None)?.inside)
    }

    /// Bounds on the Euclidean distance from `x` to the zonotope, refined
    /// until they decide whether the distance exceeds `tol` or pin it to
    /// within `tol / 10`.
    ///
    /// The distance equals `max_{|d| <= 1} d . x - h(d)`, a concave
    /// maximization in `n` variables, solved by the deep-cut ellipsoid
    /// method. Every iterate gives a lower bound and, through its
    /// supergradient `x - sum sgn(d . g_i) g_i`, an upper bound.
    pub fn distance_bounds(&self, x: &[f64], tol: f64) -> Result<DistanceBounds> {
        self.check_dim(x)?;
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("membership tolerance must be positive, got {tol}")));
        }
        let n = self.n;
        let x_norm = dot(x, x).sqrt();
        let mut best = DistanceBounds { lower: 0.0, upper: x_norm, direction: vec![0.0; n], iterations: 0 };
        if self.scale == 0.0 || self.is_empty() || x_norm <= tol {
            return Ok(best);
        }
        let s = self.scale.abs();
        let target: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
        let tol_raw = tol / s;
        if n == 1 {
            let dist = (target[0].abs() - self.raw_support(&[1.0])).max(0.0);
            best.lower = dist * s;
            best.upper = dist * s;
            best.direction = vec![target[0].signum() * self.scale.signum()];
            return Ok(best);
        }

        let nf = n as f64;
        let max_iter = 400 * n * n + 2000;
        let mut center = vec![0.0; n];
        let mut shape = vec![0.0; n * n];
        for i in 0..n {
            shape[i * n + i] = 1.0;
        }
        let (mut lower, mut upper) = (0.0f64, x_norm / s);
        let mut direction = vec![0.0; n];
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let c_norm = dot(&center, &center).sqrt();
            // cut `a . (d - center) <= -depth`
            let (a, depth) = if c_norm > 1.0 {
                (center.iter().map(|v| v / c_norm).collect::<Vec<_>>(), c_norm - 1.0)
            } else {
                let mut grad = target.clone();
                for g in self.raw_generators() {
                    let p = dot(g, &center);
                    if p != 0.0 {
                        axpy(-p.signum(), g, &mut grad);
                    }
                }
                let value = dot(&center, &target) - self.raw_support(&center);
                if value > lower {
                    lower = value;
                    direction.copy_from_slice(&center);
                }
                let reach = quad_form(&shape, &grad, n).sqrt();
                upper = upper.min(value + reach);
                if reach == 0.0 {
                    upper = upper.min(value.max(lower));
                    break;
                }
                (grad.iter().map(|v| -v).collect::<Vec<_>>(), lower - value)
            };
            if upper - lower <= tol_raw / 10.0 || lower > tol_raw || upper <= tol_raw {
                break;
            }
            let width = quad_form(&shape, &a, n).sqrt();
            if !(width > 1e-300) {
                break;
            }
            let alpha = depth / width;
            if alpha >= 1.0 {
                break;
            }
            let mut pa = vec![0.0; n];
            for i in 0..n {
                pa[i] = (0..n).map(|j| shape[i * n + j] * a[j]).sum::<f64>() / width;
            }
            let step = (1.0 + nf * alpha) / (nf + 1.0);
            axpy(-step, &pa, &mut center);
            let shrink = nf * nf * (1.0 - alpha * alpha) / (nf * nf - 1.0);
            let rank1 = 2.0 * (1.0 + nf * alpha) / ((nf + 1.0) * (1.0 + alpha));
            for i in 0..n {
                for j in 0..n {
                    shape[i * n + j] = shrink * (shape[i * n + j] - rank1 * pa[i] * pa[j]);
                }
            }
        }
        best.lower = lower.max(0.0) * s;
        best.upper = upper.max(lower).max(0.0) * s;
        let d_norm = dot(&direction, &direction).sqrt();
        if d_norm > 0.0 {
            best.direction = direction.iter().map(|v| v / d_norm * self.scale.signum()).collect();
        }
        best.iterations = iterations;
        Ok(best)
    }

    /// Box-constrained least squares `min_{|c_i| <= 1} ||x - sum c_i g_i||`
    /// by projected coordinate descent.
    ///
    /// Stops when the residual is within `tol` (inside), when the residual
    /// direction separates `x` from the zonotope by more than `tol` (outside),
    /// or when ten sweeps improve the residual by less than `tol / 10`.
    /// `warm_start` may hold coefficients from a related problem; missing
    /// entries start at zero.
    pub fn project(&self, x: &[f64], tol: f64, warm_start: Option<&[f64]>) -> Result<Projection> {
        self.check_dim(x)?;
        if !(tol > 0.0) {
            return Err(Error::Parameter(format!("membership tolerance must be positive, got {tol}")));
        }
        let count = self.len();
        if self.scale == 0.0 || count == 0 {
            let norm = dot(x, x).sqrt();
            return Ok(Projection {
                coefficients: vec![0.0; count],
                residual: norm,
                separation: norm,
                inside: norm <= tol,
                sweeps: 0,
            });
        }
        // work in raw generator units
        let s = self.scale;
        let tol_raw = tol / s.abs();
        let target: Vec<f64> = x.iter().map(|v| v / s).collect();

        let norms: Vec<f64> = self.raw_generators().map(|g| dot(g, g)).collect();
        let mut coeff = vec![0.0; count];
        if let Some(w) = warm_start {
            for (c, &v) in coeff.iter_mut().zip(w) {
                *c = v.clamp(-1.0, 1.0);
            }
        }
        let mut residual = target.clone();
        for (g, &c) in self.raw_generators().zip(&coeff) {
            if c != 0.0 {
                axpy(-c, g, &mut residual);
            }
        }

        const WINDOW: usize = 10;
        const MAX_SWEEPS: usize = 200_000;
        let mut history = Vec::with_capacity(64);
        let mut sweeps = 0;
        let mut res_norm = dot(&residual, &residual).sqrt();
        let mut separation = f64::NEG_INFINITY;
        let mut inside = res_norm <= tol_raw;
        while !inside && sweeps < MAX_SWEEPS {
            for (i, g) in self.raw_generators().enumerate() {
                if norms[i] == 0.0 {
                    continue;
                }
                let c_new = (coeff[i] + dot(g, &residual) / norms[i]).clamp(-1.0, 1.0);
                let step = c_new - coeff[i];
                if step != 0.0 {
                    axpy(-step, g, &mut residual);
                    coeff[i] = c_new;
                }
            }
            sweeps += 1;
            res_norm = dot(&residual, &residual).sqrt();
            if res_norm <= tol_raw {
                inside = true;
                break;
            }
            let d: Vec<f64> = residual.iter().map(|v| v / res_norm).collect();
            separation = dot(&d, &target) - self.raw_support(&d);
            if separation > tol_raw {
                break;
            }
            history.push(res_norm);
            if history.len() > WINDOW && history[history.len() - 1 - WINDOW] - res_norm < tol_raw / 10.0 {
                break;
            }
        }
        if !inside && separation <= tol_raw {
            // stagnated without a certificate either way
            let bounds = self.distance_bounds(x, tol)?;
            inside = bounds.within(tol);
            separation = separation.max(bounds.lower / s.abs());
        }
        Ok(Projection {
            coefficients: coeff,
            residual: res_norm * s.abs(),
            separation: separation * s.abs(),
            inside,
            sweeps,
        })
    }

    /// Vertices of a zonogon in counter-clockwise order, starting at the sum
    /// of the generators (after flipping them into the upper half-plane).
    /// Parallel generators are merged; a single direction yields a 2-point
    /// segment and all-zero generators a single point.
    pub fn polygon_2d(&self) -> Result<Vec<[f64; 2]>> {
        if self.n != 2 {
            return Err(Error::Unsupported(format!("polygon_2d needs a planar zonotope, got dimension {}", self.n)));
        }
        let mut dirs: Vec<[f64; 2]> = self
            .raw_generators()
            .filter(|g| g[0] != 0.0 || g[1] != 0.0)
            .map(|g| {
                let g = [g[0] * self.scale, g[1] * self.scale];
                if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
                    [-g[0], -g[1]]
                } else {
                    g
                }
            })
            .collect();
        dirs.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(dirs.len());
        for g in dirs {
            match merged.last_mut() {
                Some(last) if cross(last, &g).abs() <= 1e-12 * norm2(last) * norm2(&g) => {
                    last[0] += g[0];
                    last[1] += g[1];
                }
                _ => merged.push(g),
            }
        }
        let top = merged.iter().fold([0.0, 0.0], |acc, g| [acc[0] + g[0], acc[1] + g[1]]);
        if merged.is_empty() {
            return Ok(vec![[0.0, 0.0]]);
        }
        if merged.len() == 1 {
            return Ok(vec![top, [-top[0], -top[1]]]);
        }
        let mut verts = Vec::with_capacity(2 * merged.len());
        let mut v = top;
        for g in &merged {
            verts.push(v);
            v = [v[0] - 2.0 * g[0], v[1] - 2.0 * g[1]];
        }
        for g in &merged {
            verts.push(v);
            v = [v[0] + 2.0 * g[0], v[1] + 2.0 * g[1]];
        }
        Ok(verts)
    }
}

/// Result of [`GeneratorZonotope::project`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    /// Distance from the query to the best combination found.
    pub residual: f64,
    /// Best separating margin `d . x - h(d)` seen along the residual direction.
    pub separation: f64,
    pub inside: bool,
    pub sweeps: usize,
}

impl Projection {
    /// Coefficients strictly inside `(-1, 1)`.
    pub fn interior_count(&self) -> usize {
        self.coefficients.iter().filter(|c| c.abs() < 1.0 - 1e-9).count()
    }
}

/// Result of [`GeneratorZonotope::distance_bounds`].
#[derive(Debug, Clone)]
pub struct DistanceBounds {
    pub lower: f64,
    pub upper: f64,
    /// Unit direction attaining `lower` (zero when `lower` is zero).
    pub direction: Vec<f64>,
    pub iterations: usize,
}

impl DistanceBounds {
    /// Inside up to `tol`; an undecided bracket is split at its midpoint.
    pub fn within(&self, tol: f64) -> bool {
        self.upper <= tol || (self.lower <= tol && self.lower + self.upper <= 2.0 * tol)
    }
}

pub fn default_tolerance(x: &[f64]) -> f64 {
    1e-8 * (1.0 + dot(x, x).sqrt())
}

/// Incremental volume of a growing generator list.
///
/// Stores the cofactor vector `c_S` of every `(n-1)`-subset `S` of absorbed
/// generators, so that `det([g_S, g]) = c_S . g`. Absorbing `g` adds
/// `2^n * sum_S |c_S . g|` to the volume and then appends cofactors of the
/// new subsets that contain `g`.
#[derive(Debug, Clone)]
pub struct VolumeAccumulator {
    n: usize,
    generators: Vec<Vec<f64>>,
    /// Flat, `n` entries per stored subset.
    cofactors: Vec<f64>,
    volume: f64,
}

impl VolumeAccumulator {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("accumulator dimension must be at least 1".into()));
        }
        // the empty subset's cofactor in one dimension is the constant 1
        let cofactors = if n == 1 { vec![1.0] } else { Vec::new() };
        Ok(Self { n, generators: Vec::new(), cofactors, volume: 0.0 })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn count(&self) -> usize {
        self.generators.len()
    }

    pub fn stored_minors(&self) -> usize {
        self.cofactors.len() / self.n
    }

    /// Absorbs one generator and returns the updated volume.
    pub fn absorb(&mut self, g: &[f64]) -> Result<f64> {
        let n = self.n;
        if g.len() != n {
            return Err(Error::Dimension(format!("generator of length {} in dimension {n}", g.len())));
        }
        let added: f64 = self.cofactors.chunks_exact(n).map(|c| dot(c, g).abs()).sum();
        self.volume += 2f64.powi(n as i32) * added;

        if n >= 2 {
            let prev = self.generators.len();
            let mut cols = vec![0.0; n * (n - 1)];
            let mut buf = vec![0.0; (n - 1) * (n - 1)];
            let mut fresh = Vec::new();
            for_each_combination(prev, n - 2, |subset| {
                for (k, &j) in subset.iter().enumerate() {
                    cols[k * n..(k + 1) * n].copy_from_slice(&self.generators[j]);
                }
                cols[(n - 2) * n..].copy_from_slice(g);
                fresh.extend(cofactor_vector(&cols, n, &mut buf));
            });
            self.cofactors.extend(fresh);
        }
        self.generators.push(g.to_vec());
        Ok(self.volume)
    }
}

/// Volume of a planar zonotope in `O(N log N)`: generators flipped into the
/// upper half-plane and sorted by angle have non-negative pairwise cross
/// products, so `sum_{i<j} |g_i x g_j| = sum_j (prefix_{j-1} x g_j)`.
fn planar_volume(flat: &[f64]) -> f64 {
    let mut dirs: Vec<[f64; 2]> = flat
        .chunks_exact(2)
        .map(|g| if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) { [-g[0], -g[1]] } else { [g[0], g[1]] })
        .collect();
    dirs.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    let mut prefix = [0.0, 0.0];
    let mut total = 0.0;
    for g in &dirs {
        total += cross(&prefix, g).abs();
        prefix[0] += g[0];
        prefix[1] += g[1];
    }
    4.0 * total
}

/// Cofactors of the `n x (n-1)` column set `cols` (column-major), such that
/// `det([cols, x]) = sum_k c_k x_k`.
fn cofactor_vector(cols: &[f64], n: usize, buf: &mut [f64]) -> Vec<f64> {
    let m = n - 1;
    (0..n)
        .map(|k| {
            for c in 0..m {
                let mut r_out = 0;
                for r in 0..n {
                    if r != k {
                        buf[c * m + r_out] = cols[c * n + r];
                        r_out += 1;
                    }
                }
            }
            let sign = if (k + m).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * determinant_in_place(buf, m)
        })
        .collect()
}

/// Determinant of an `n x n` matrix by Gaussian elimination with partial
/// pivoting; `a` is overwritten. Storage order does not matter.
pub(crate) fn determinant_in_place(a: &mut [f64], n: usize) -> f64 {
    match n {
        0 => return 1.0,
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        3 => {
            return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {}
    }
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

/// Calls `f` with every increasing `k`-subset of `0..m`.
pub(crate) fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub(crate) fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn quad_form(m: &[f64], v: &[f64], n: usize) -> f64 {
    (0..n).map(|i| v[i] * (0..n).map(|j| m[i * n + j] * v[j]).sum::<f64>()).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn cross(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm2(a: &[f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(gens: &[[f64; 2]]) -> GeneratorZonotope {
        GeneratorZonotope::new(2, &gens.iter().map(|g| g.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    const HEX: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];

    #[test]
    fn volume_examples() {
        assert_eq!(z(&[[1.0, 0.0], [0.0, 1.0]]).volume_exact().unwrap(), 4.0);
        assert_eq!(z(&HEX).volume_exact().unwrap(), 12.0);
        assert_eq!(z(&HEX).volume_by_enumeration().unwrap(), 12.0);
        assert_eq!(z(&[[1.0, 0.0]]).volume_exact().unwrap(), 0.0);
        assert_eq!(z(&[[1.0, 0.0]]).volume_by_enumeration().unwrap(), 0.0);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(GeneratorZonotope::new(0, &[]), Err(Error::Parameter(_))));
        assert!(matches!(VolumeAccumulator::new(0), Err(Error::Parameter(_))));
    }

    #[test]
    fn enumeration_cap() {
        let gens: Vec<Vec<f64>> = (0..400).map(|i| vec![1.0, i as f64, (i * i) as f64]).collect();
        let zono = GeneratorZonotope::new(3, &gens).unwrap();
        assert!(matches!(zono.volume_exact(), Err(Error::Resource(_))));
    }

    #[test]
    fn incremental_examples() {
        let mut acc = VolumeAccumulator::new(2).unwrap();
        assert_eq!(acc.absorb(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(acc.absorb(&[0.0, 1.0]).unwrap(), 4.0);
        assert_eq!(acc.absorb(&[1.0, 1.0]).unwrap(), 12.0);
        assert_eq!(acc.count(), 3);

        let mut acc = VolumeAccumulator::new(2).unwrap();
        assert_eq!(acc.absorb(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(acc.absorb(&[2.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(acc.absorb(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn incremental_one_and_three_dimensions() {
        let mut acc = VolumeAccumulator::new(1).unwrap();
        acc.absorb(&[0.5]).unwrap();
        assert_eq!(acc.absorb(&[-1.5]).unwrap(), 4.0);

        let mut acc = VolumeAccumulator::new(3).unwrap();
        for g in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
            acc.absorb(&g).unwrap();
        }
        assert_eq!(acc.volume(), 8.0);
        acc.absorb(&[1.0, 1.0, 1.0]).unwrap();
        // cube plus three unit parallelepipeds swept by (1,1,1): 8 * (1 + 3)
        assert_eq!(acc.volume(), 32.0);
    }

    #[test]
    fn support_examples() {
        let sq = z(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(sq.support(&[1.0, 0.0]).unwrap(), 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sq.support(&[s, s]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(z(&HEX).support(&[0.0, 1.0]).unwrap(), 2.0);
        assert!(matches!(sq.support(&[0.0, 0.0]), Err(Error::Parameter(_))));
        assert!(matches!(sq.support(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn contains_examples() {
        let sq = z(&[[1.0, 0.0], [0.0, 1.0]]);
        assert!(sq.contains(&[0.0, 0.0], None).unwrap());
        assert!(!sq.contains(&[2.1, 0.0], None).unwrap());
        assert!(sq.contains(&[1.0, 1.0], Some(1e-9)).unwrap());
        assert!(matches!(sq.contains(&[1.0], None), Err(Error::Dimension(_))));
    }

    #[test]
    fn contains_thin_and_scaled() {
        let hex = z(&HEX);
        assert!(hex.contains(&[1.999, 1.999], None).unwrap());
        assert!(!hex.contains(&[2.0, -0.1], None).unwrap());
        let half = hex.scaled(0.5);
        assert!(half.contains(&[0.99, 0.99], None).unwrap());
        assert!(!half.contains(&[1.01, 1.01], None).unwrap());
    }

    #[test]
    fn distance_bounds_bracket_true_distance() {
        let sq = z(&[[1.0, 0.0], [0.0, 1.0]]);
        // decisions are resolved to within a tenth of the tolerance
        let d = 5f64.sqrt();
        for (x, dist) in [([3.0, 0.0], 2.0), ([2.0, 3.0], d)] {
            for tol in [dist * 0.9, dist * 1.1] {
                let b = sq.distance_bounds(&x, tol).unwrap();
                assert!(b.lower <= dist + 1e-12 && b.upper >= dist - 1e-12, "{b:?}");
                assert_eq!(b.within(tol), tol > dist);
            }
        }
        assert!(sq.distance_bounds(&[0.5, -0.5], 1e-9).unwrap().within(1e-9));
    }

    #[test]
    fn distance_bounds_on_dense_curve() {
        // many nearly parallel generators, where coordinate descent stalls
        let gens: Vec<Vec<f64>> =
            (0..5000).map(|i| i as f64 * 1e-3).map(|t| vec![1e-3 * (-t).exp(), 1e-3 * (-2.0 * t).exp()]).collect();
        let zono = GeneratorZonotope::new(2, &gens).unwrap();
        let verts = zono.polygon_2d().unwrap();
        let v = verts[verts.len() / 3];
        let tol = 1e-7;
        assert!(zono.distance_bounds(&v, tol).unwrap().within(tol));
        let outward = [v[0] * (1.0 + 1e-5), v[1] * (1.0 + 1e-5)];
        assert!(!zono.distance_bounds(&outward, tol).unwrap().within(tol));
    }

    #[test]
    fn polygon_examples() {
        let sq = z(&[[1.0, 0.0], [0.0, 1.0]]).polygon_2d().unwrap();
        assert_eq!(sq, vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]);
        let hex = z(&HEX).polygon_2d().unwrap();
        assert_eq!(hex, vec![[2.0, 2.0], [0.0, 2.0], [-2.0, 0.0], [-2.0, -2.0], [0.0, -2.0], [2.0, 0.0]]);
        let seg = z(&[[1.0, 0.0]]).polygon_2d().unwrap();
        assert_eq!(seg, vec![[1.0, 0.0], [-1.0, 0.0]]);
        let three = GeneratorZonotope::new(3, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(three.polygon_2d(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn combinations_and_binomials() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut empty = 0;
        for_each_combination(3, 0, |_| empty += 1);
        assert_eq!(empty, 1);
        assert_eq!(binomial(12, 4), 495.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn determinant_matches_nalgebra() {
        let vals = [2.0, -1.0, 0.5, 3.0, 1.0, 4.0, -2.0, 0.3, 0.7, 1.1, 5.0, -0.4, 2.2, 0.0, 1.5, -3.0];
        let m = nalgebra::DMatrix::from_row_slice(4, 4, &vals);
        let mut buf = vals.to_vec();
        assert!((determinant_in_place(&mut buf, 4) - m.determinant()).abs() < 1e-10);
    }
}
