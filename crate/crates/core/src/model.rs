//! Word points, translational bumps and the two relation boxes.
//!
//! Every word embedding `e` is projected twice: `phi_base · e` gives the
//! word's base position and `phi_bump · e` gives the bump it applies to the
//! other member of a pair. For a candidate pair `(hyponym, hypernym)` the
//! hyponym lands at `base(hyponym) + bump(hypernym)` and is measured against
//! the head box; the hypernym lands at `base(hypernym) + bump(hyponym)` and is
//! measured against the tail box. The pair's score is the sum of the two L2
//! norms of the per-dimension box distances, so lower is better.
//!
//! Boxes are stored as two unconstrained corners. The lower and upper bounds
//! are their elementwise min and max, which keeps `lower <= upper` without any
//! projection step during optimization.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    /// `self · v` without a length check.
    pub(crate) fn mul_vec_unchecked(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// A box stored as two free corners.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxParams {
    pub corner_p: Vec<f64>,
    pub corner_q: Vec<f64>,
}

impl BoxParams {
    pub fn new(corner_p: Vec<f64>, corner_q: Vec<f64>) -> Result<Self> {
        if corner_p.len() != corner_q.len() {
            return Err(Error::DimensionMismatch {
                context: "box corners",
                expected: corner_p.len(),
                found: corner_q.len(),
            });
        }
        Ok(BoxParams { corner_p, corner_q })
    }

    pub fn zeros(d: usize) -> Self {
        BoxParams {
            corner_p: vec![0.0; d],
            corner_q: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.corner_p.len()
    }

    pub fn geometry(&self) -> BoxGeometry {
        box_geometry(self)
    }
}

/// Lower/upper/center/width view of a box. Width is `upper - lower + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGeometry {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub center: Vec<f64>,
    pub width: Vec<f64>,
}

impl BoxGeometry {
    /// Builds the geometry straight from bounds; `lower[j] <= upper[j]` is the caller's job.
    pub fn from_bounds(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let center = lower.iter().zip(&upper).map(|(l, u)| (u + l) / 2.0).collect();
        let width = lower.iter().zip(&upper).map(|(l, u)| u - l + 1.0).collect();
        BoxGeometry {
            lower,
            upper,
            center,
            width,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| l <= x && x <= u)
    }
}

/// All trainable parameters: the two projections and the head/tail boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `d × m`, maps an embedding to its base position.
    pub phi_base: Matrix,
    /// `d × m`, maps an embedding to the bump it applies to its partner.
    pub phi_bump: Matrix,
    /// Box for the first slot of a pair (the hyponym).
    pub head_box: BoxParams,
    /// Box for the second slot of a pair (the hypernym).
    pub tail_box: BoxParams,
}

/// Names of the parameter blocks in storage order.
pub const BLOCK_NAMES: [&str; 6] = [
    "phi_base",
    "phi_bump",
    "head_box.corner_p",
    "head_box.corner_q",
    "tail_box.corner_p",
    "tail_box.corner_q",
];

impl ModelParams {
    pub fn new(phi_base: Matrix, phi_bump: Matrix, head_box: BoxParams, tail_box: BoxParams) -> Result<Self> {
        let d = phi_base.rows();
        let m = phi_base.cols();
        let check = |context, expected, found| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                })
            }
        };
        check("phi_bump rows", d, phi_bump.rows())?;
        check("phi_bump cols", m, phi_bump.cols())?;
        check("head box corner_p", d, head_box.corner_p.len())?;
        check("head box corner_q", d, head_box.corner_q.len())?;
        check("tail box corner_p", d, tail_box.corner_p.len())?;
        check("tail box corner_q", d, tail_box.corner_q.len())?;
        Ok(ModelParams {
            phi_base,
            phi_bump,
            head_box,
            tail_box,
        })
    }

    /// All-zero parameters of the given shape; also the gradient accumulator shape.
    pub fn zeros(d: usize, m: usize) -> Self {
        ModelParams {
            phi_base: Matrix::zeros(d, m),
            phi_bump: Matrix::zeros(d, m),
            head_box: BoxParams::zeros(d),
            tail_box: BoxParams::zeros(d),
        }
    }

    /// Box dimension `d`.
    pub fn box_dim(&self) -> usize {
        self.phi_base.rows()
    }

    /// Input embedding dimension `m`.
    pub fn embedding_dim(&self) -> usize {
        self.phi_base.cols()
    }

    pub fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// Parameter blocks in storage order (see [`BLOCK_NAMES`]).
    pub fn blocks(&self) -> [&[f64]; 6] {
        [
            self.phi_base.as_slice(),
            self.phi_bump.as_slice(),
            &self.head_box.corner_p,
            &self.head_box.corner_q,
            &self.tail_box.corner_p,
            &self.tail_box.corner_q,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.phi_base.as_mut_slice(),
            self.phi_bump.as_mut_slice(),
            &mut self.head_box.corner_p,
            &mut self.head_box.corner_q,
            &mut self.tail_box.corner_p,
            &mut self.tail_box.corner_q,
        ]
    }

    /// Name of the first block holding a NaN or infinity, if any.
    pub fn first_non_finite_block(&self) -> Option<&'static str> {
        self.blocks()
            .iter()
            .zip(BLOCK_NAMES)
            .find(|(b, _)| b.iter().any(|x| !x.is_finite()))
            .map(|(_, name)| name)
    }

    fn check_embedding(&self, e: &[f64]) -> Result<()> {
        if e.len() != self.embedding_dim() {
            return Err(Error::DimensionMismatch {
                context: "word embedding",
                expected: self.embedding_dim(),
                found: e.len(),
            });
        }
        Ok(())
    }
}

/// Pair-relative final positions of both words.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoints {
    pub head_point: Vec<f64>,
    pub tail_point: Vec<f64>,
}

/// Matrix–vector product `phi · e`.
pub fn project(phi: &Matrix, e: &[f64]) -> Result<Vec<f64>> {
    if phi.cols() != e.len() {
        return Err(Error::DimensionMismatch {
            context: "projection",
            expected: phi.cols(),
            found: e.len(),
        });
    }
    Ok(phi.mul_vec_unchecked(e))
}

/// Final embeddings for the pair `(e_i, e_j)`: `base(i) + bump(j)` and `base(j) + bump(i)`.
pub fn pair_points(e_i: &[f64], e_j: &[f64], params: &ModelParams) -> Result<PairPoints> {
    params.check_embedding(e_i)?;
    params.check_embedding(e_j)?;
    let head = Projected::new(params, e_i);
    let tail = Projected::new(params, e_j);
    Ok(head.points_with(&tail))
}

/// Lower, upper, center and width from the two corners.
///
/// At `corner_p[j] == corner_q[j]` the lower bound is taken from `corner_p`;
/// [`score_gradient`] routes gradients the same way.
pub fn box_geometry(bx: &BoxParams) -> BoxGeometry {
    let (lower, upper) = bx
        .corner_p
        .iter()
        .zip(&bx.corner_q)
        .map(|(&p, &q)| bounds(p, q))
        .unzip();
    BoxGeometry::from_bounds(lower, upper)
}

/// Per-dimension distance of `point` to a box.
///
/// Inside a dimension (`l <= x <= u`, boundary included) the distance is
/// `|x - c| / w`; outside it is `|x - c| * w - k` with
/// `k = (w - 1)(w - 1/w) / 2`, which makes the two branches meet at the bounds.
pub fn box_distance(point: &[f64], geom: &BoxGeometry) -> Result<Vec<f64>> {
    if point.len() != geom.dim() {
        return Err(Error::DimensionMismatch {
            context: "box distance",
            expected: geom.dim(),
            found: point.len(),
        });
    }
    Ok(point
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let offset = (x - geom.center[j]).abs();
            let w = geom.width[j];
            if geom.lower[j] <= x && x <= geom.upper[j] {
                inside_branch(offset, w)
            } else {
                outside_branch(offset, w)
            }
        })
        .collect())
}

/// Width-dependent correction subtracted in the outside branch.
pub fn kappa(width: f64) -> f64 {
    0.5 * (width - 1.0) * (width - 1.0 / width)
}

/// `|x - c| / w`
pub fn inside_branch(offset: f64, width: f64) -> f64 {
    offset / width
}

/// `|x - c| * w - kappa(w)`
pub fn outside_branch(offset: f64, width: f64) -> f64 {
    offset * width - kappa(width)
}

/// Plausibility score of `e_i` being a hyponym of `e_j`; lower is more plausible.
pub fn score_pair(e_i: &[f64], e_j: &[f64], params: &ModelParams) -> Result<f64> {
    let points = pair_points(e_i, e_j, params)?;
    Ok(norm(&box_distance(&points.head_point, &params.head_box.geometry())?)
        + norm(&box_distance(&points.tail_point, &params.tail_box.geometry())?))
}

/// Gradient of [`score_pair`] with respect to every parameter, shaped like `ModelParams`.
pub fn score_gradient(e_i: &[f64], e_j: &[f64], params: &ModelParams) -> Result<ModelParams> {
    params.check_embedding(e_i)?;
    params.check_embedding(e_j)?;
    let head = Projected::new(params, e_i);
    let tail = Projected::new(params, e_j);
    let mut grad = ModelParams::zeros(params.box_dim(), params.embedding_dim());
    let pg = head.score_grad_with(&tail, params, 1.0, &mut grad.head_box, &mut grad.tail_box);
    add_outer(&mut grad.phi_base, &pg.d_head, e_i);
    add_outer(&mut grad.phi_base, &pg.d_tail, e_j);
    add_outer(&mut grad.phi_bump, &pg.d_head, e_j);
    add_outer(&mut grad.phi_bump, &pg.d_tail, e_i);
    Ok(grad)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `m += a · bᵀ`
pub(crate) fn add_outer(m: &mut Matrix, a: &[f64], b: &[f64]) {
    let cols = m.cols();
    for (row, &ai) in m.as_mut_slice().chunks_exact_mut(cols.max(1)).zip(a) {
        if ai == 0.0 {
            continue;
        }
        for (x, &bj) in row.iter_mut().zip(b) {
            *x += ai * bj;
        }
    }
}

#[inline]
fn bounds(p: f64, q: f64) -> (f64, f64) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

/// A word's base position and bump under fixed projections.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Projected {
    pub base: Vec<f64>,
    pub bump: Vec<f64>,
}

/// One dimension of a box with its width-dependent constants precomputed.
#[derive(Debug, Clone, Copy)]
struct DimBox {
    lower: f64,
    upper: f64,
    center: f64,
    width: f64,
    kappa: f64,
}

impl DimBox {
    fn new(p: f64, q: f64) -> Self {
        let (lower, upper) = bounds(p, q);
        let width = upper - lower + 1.0;
        DimBox {
            lower,
            upper,
            center: (upper + lower) / 2.0,
            width,
            kappa: kappa(width),
        }
    }

    /// Same arithmetic as [`box_distance`], so results agree bit for bit.
    #[inline]
    fn distance(&self, x: f64) -> f64 {
        let offset = (x - self.center).abs();
        if self.lower <= x && x <= self.upper {
            offset / self.width
        } else {
            offset * self.width - self.kappa
        }
    }
}

/// Both boxes of a parameter set, prepared for scoring many pairs.
#[derive(Debug, Clone)]
pub(crate) struct ScoringBoxes {
    head: Vec<DimBox>,
    tail: Vec<DimBox>,
}

impl ScoringBoxes {
    pub fn new(params: &ModelParams) -> Self {
        let prepare = |b: &BoxParams| {
            b.corner_p
                .iter()
                .zip(&b.corner_q)
                .map(|(&p, &q)| DimBox::new(p, q))
                .collect()
        };
        ScoringBoxes {
            head: prepare(&params.head_box),
            tail: prepare(&params.tail_box),
        }
    }
}

/// Gradient of a pair's score with respect to its two final points.
#[derive(Debug, Clone)]
pub(crate) struct PointGrad {
    pub d_head: Vec<f64>,
    pub d_tail: Vec<f64>,
}

impl Projected {
    pub fn new(params: &ModelParams, e: &[f64]) -> Self {
        Projected {
            base: params.phi_base.mul_vec_unchecked(e),
            bump: params.phi_bump.mul_vec_unchecked(e),
        }
    }

    /// `self` in the head slot, `other` in the tail slot.
    pub fn points_with(&self, other: &Projected) -> PairPoints {
        PairPoints {
            head_point: add(&self.base, &other.bump),
            tail_point: add(&other.base, &self.bump),
        }
    }

    pub fn score_with(&self, other: &Projected, boxes: &ScoringBoxes) -> f64 {
        let mut head = 0.0;
        let mut tail = 0.0;
        for (j, (hb, tb)) in boxes.head.iter().zip(&boxes.tail).enumerate() {
            let h = hb.distance(self.base[j] + other.bump[j]);
            head += h * h;
            let t = tb.distance(other.base[j] + self.bump[j]);
            tail += t * t;
        }
        head.sqrt() + tail.sqrt()
    }

    /// Adds `weight ×` the box-corner gradients of the pair score into
    /// `head_grad` / `tail_grad`. The returned point gradients are unweighted.
    pub fn score_grad_with(
        &self,
        other: &Projected,
        params: &ModelParams,
        weight: f64,
        head_grad: &mut BoxParams,
        tail_grad: &mut BoxParams,
    ) -> PointGrad {
        let head_point = add(&self.base, &other.bump);
        let tail_point = add(&other.base, &self.bump);
        let d_head = box_term_grad(&head_point, &params.head_box, weight, head_grad);
        let d_tail = box_term_grad(&tail_point, &params.tail_box, weight, tail_grad);
        PointGrad { d_head, d_tail }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Distance in one dimension with partial derivatives
/// `(f, df/dx, df/dl, df/du)`.
#[inline]
fn dim_partials(x: f64, l: f64, u: f64) -> (f64, f64, f64, f64) {
    let c = (u + l) / 2.0;
    let w = u - l + 1.0;
    let delta = x - c;
    let offset = delta.abs();
    let sign = if delta > 0.0 {
        1.0
    } else if delta < 0.0 {
        -1.0
    } else {
        0.0
    };
    let (f, df_dx, df_dw) = if l <= x && x <= u {
        (offset / w, sign / w, -offset / (w * w))
    } else {
        let dkappa = 0.5 * ((w - 1.0 / w) + (w - 1.0) * (1.0 + 1.0 / (w * w)));
        (offset * w - kappa(w), sign * w, offset - dkappa)
    };
    let df_dc = -df_dx;
    // c = (l + u)/2, w = u - l + 1
    (f, df_dx, 0.5 * df_dc - df_dw, 0.5 * df_dc + df_dw)
}

/// Gradient of `‖dist(point, bx)‖₂` with respect to `point`; `weight ×` its
/// corner gradients are added into `grad`.
fn box_term_grad(point: &[f64], bx: &BoxParams, weight: f64, grad: &mut BoxParams) -> Vec<f64> {
    let d = point.len();
    let mut parts = Vec::with_capacity(d);
    let mut sq = 0.0;
    for ((&x, &p), &q) in point.iter().zip(&bx.corner_p).zip(&bx.corner_q) {
        let (l, u) = bounds(p, q);
        let part = dim_partials(x, l, u);
        sq += part.0 * part.0;
        parts.push(part);
    }
    let n = sq.sqrt();
    let mut d_point = vec![0.0; d];
    if n == 0.0 {
        return d_point;
    }
    for (j, &(f, df_dx, df_dl, df_du)) in parts.iter().enumerate() {
        let s = f / n;
        d_point[j] = s * df_dx;
        let (gl, gu) = (weight * s * df_dl, weight * s * df_du);
        if bx.corner_p[j] <= bx.corner_q[j] {
            grad.corner_p[j] += gl;
            grad.corner_q[j] += gu;
        } else {
            grad.corner_p[j] += gu;
            grad.corner_q[j] += gl;
        }
    }
    d_point
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn one_d_box() -> BoxParams {
        BoxParams::new(vec![0.0], vec![2.0]).unwrap()
    }

    #[test]
    fn project_identity_zero_and_hand_product() {
        let e = [0.3, -1.2];
        assert_eq!(project(&Matrix::identity(2), &e).unwrap(), vec![0.3, -1.2]);
        assert_eq!(project(&Matrix::zeros(2, 2), &e).unwrap(), vec![0.0, 0.0]);
        let phi = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(project(&phi, &[1.0, 1.0]).unwrap(), vec![3.0, 1.0]);
    }

    #[test]
    fn project_rejects_wrong_length() {
        let err = project(&Matrix::zeros(2, 3), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 3,
                found: 2,
                ..
            }
        ));
    }

    #[test]
    fn pair_points_cases() {
        let mut params = ModelParams::zeros(2, 2);
        params.phi_base = Matrix::identity(2);
        let pts = pair_points(&[1.0, 2.0], &[3.0, 4.0], &params).unwrap();
        assert_eq!(pts.head_point, vec![1.0, 2.0]);
        assert_eq!(pts.tail_point, vec![3.0, 4.0]);

        params.phi_bump = Matrix::from_rows(&[vec![0.5, -1.0], vec![2.0, 0.25]]).unwrap();
        let pts = pair_points(&[0.7, -0.2], &[0.7, -0.2], &params).unwrap();
        assert_eq!(pts.head_point, pts.tail_point);

        params.phi_bump = Matrix::identity(2);
        let pts = pair_points(&[1.0, 0.0], &[0.0, 1.0], &params).unwrap();
        assert_eq!(pts.head_point, vec![1.0, 1.0]);
        assert_eq!(pts.tail_point, vec![1.0, 1.0]);
    }

    #[test]
    fn geometry_from_corners() {
        let g = box_geometry(&BoxParams::new(vec![1.0, 1.0], vec![1.0, 1.0]).unwrap());
        assert_eq!(g.lower, vec![1.0, 1.0]);
        assert_eq!(g.upper, vec![1.0, 1.0]);
        assert_eq!(g.center, vec![1.0, 1.0]);
        assert_eq!(g.width, vec![1.0, 1.0]);

        let bx = BoxParams::new(vec![0.0, 3.0], vec![2.0, -1.0]).unwrap();
        let g = box_geometry(&bx);
        assert_eq!(g.lower, vec![0.0, -1.0]);
        assert_eq!(g.upper, vec![2.0, 3.0]);
        assert_eq!(g.center, vec![1.0, 1.0]);
        assert_eq!(g.width, vec![3.0, 5.0]);

        let swapped = BoxParams::new(bx.corner_q.clone(), bx.corner_p.clone()).unwrap();
        assert_eq!(box_geometry(&swapped), g);
    }

    #[test]
    fn distance_branches_in_one_dimension() {
        let g = one_d_box().geometry();
        let inside = box_distance(&[1.5], &g).unwrap()[0];
        assert!(close(inside, 0.5 / 3.0));
        let outside = box_distance(&[3.0], &g).unwrap()[0];
        assert!(close(kappa(3.0), 8.0 / 3.0));
        assert!(close(outside, 6.0 - 8.0 / 3.0));
        let boundary = box_distance(&[2.0], &g).unwrap()[0];
        assert!(close(boundary, 1.0 / 3.0));
        assert!(close(outside_branch(1.0, 3.0), 1.0 / 3.0));
        assert_eq!(box_distance(&[1.0], &g).unwrap(), vec![0.0]);
    }

    #[test]
    fn distance_uses_per_dimension_branches() {
        // Dimension 0 inside, dimension 1 outside.
        let g = BoxGeometry::from_bounds(vec![0.0, 0.0], vec![2.0, 2.0]);
        let d = box_distance(&[1.5, 3.0], &g).unwrap();
        assert!(close(d[0], 0.5 / 3.0));
        assert!(close(d[1], 6.0 - 8.0 / 3.0));
    }

    fn one_d_params() -> ModelParams {
        let mut params = ModelParams::zeros(1, 1);
        params.phi_base = Matrix::identity(1);
        params.head_box = one_d_box();
        params.tail_box = one_d_box();
        params
    }

    #[test]
    fn score_at_centers_is_zero() {
        let mut params = one_d_params();
        params.tail_box = BoxParams::new(vec![-3.0], vec![1.0]).unwrap();
        assert_eq!(score_pair(&[1.0], &[-1.0], &params).unwrap(), 0.0);
    }

    #[test]
    fn score_sums_both_box_terms() {
        let s = score_pair(&[1.5], &[3.0], &one_d_params()).unwrap();
        assert!((s - 3.5).abs() < 1e-12);
    }

    #[test]
    fn outside_branch_slope_is_width() {
        let params = one_d_params();
        let grad = score_gradient(&[1.5], &[3.0], &params).unwrap();
        // tail point = phi_base · e_j, so d(score)/d(phi_base) picks up
        // d(head)/dx · e_i + d(tail)/dx · e_j = (1/3)·1.5 + 3·3.
        let expected = (1.0 / 3.0) * 1.5 + 3.0 * 3.0;
        assert!((grad.phi_base.get(0, 0) - expected).abs() < 1e-12);

        let head = Projected::new(&params, &[1.5]);
        let tail = Projected::new(&params, &[3.0]);
        let mut hb = BoxParams::zeros(1);
        let mut tb = BoxParams::zeros(1);
        let pg = head.score_grad_with(&tail, &params, 1.0, &mut hb, &mut tb);
        assert!((pg.d_tail[0] - 3.0).abs() < 1e-12);
        assert!((pg.d_head[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_score_gives_zero_projection_gradient() {
        let mut params = ModelParams::zeros(2, 2);
        params.phi_base = Matrix::identity(2);
        params.head_box = BoxParams::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        params.tail_box = BoxParams::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let grad = score_gradient(&[1.0, 1.0], &[0.0, 0.0], &params).unwrap();
        assert!(grad.phi_base.as_slice().iter().all(|&g| g == 0.0));
        assert!(grad.phi_bump.as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn fast_score_matches_public_score() {
        let params = ModelParams::new(
            Matrix::from_rows(&[vec![0.2, -0.4], vec![1.1, 0.3]]).unwrap(),
            Matrix::from_rows(&[vec![-0.6, 0.1], vec![0.5, 0.9]]).unwrap(),
            BoxParams::new(vec![0.3, -0.2], vec![-0.1, 0.4]).unwrap(),
            BoxParams::new(vec![-0.5, 0.5], vec![0.2, -0.3]).unwrap(),
        )
        .unwrap();
        let (a, b) = ([0.9, -1.3], [0.4, 0.8]);
        let boxes = ScoringBoxes::new(&params);
        let fast = Projected::new(&params, &a).score_with(&Projected::new(&params, &b), &boxes);
        assert_eq!(fast, score_pair(&a, &b, &params).unwrap());
    }

    #[test]
    fn model_params_validate_shapes() {
        let err = ModelParams::new(
            Matrix::zeros(2, 3),
            Matrix::zeros(2, 3),
            BoxParams::zeros(2),
            BoxParams::zeros(3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert_eq!(ModelParams::zeros(4, 5).num_parameters(), 2 * 20 + 4 * 4);
    }
}
