//! Dense multi-index arrays of `Scalar`s.
//!
//! A tensor has an ordered list of legs, each labelled upper or lower. The
//! matrix view takes the upper legs (in order) as the row multi-index and
//! the lower legs as the column multi-index.

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::scalar::{LPoly, Point, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    upper: Vec<bool>,
    data: Vec<Scalar>,
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>, upper: Vec<bool>) -> Self {
        assert_eq!(shape.len(), upper.len());
        let len = shape.iter().product();
        Tensor { shape, upper, data: vec![Scalar::zero(); len] }
    }
    /// `k` upper legs followed by `l` lower legs, all of dimension `n`.
    pub fn mixed(n: usize, k: usize, l: usize) -> Self {
        let mut upper = vec![true; k];
        upper.extend(vec![false; l]);
        Tensor::zeros(vec![n; k + l], upper)
    }
    /// Identity map on `n^k`: legs a1..ak upper, b1..bk lower.
    pub fn identity(n: usize, k: usize) -> Self {
        let mut t = Tensor::mixed(n, k, k);
        let m = n.pow(k as u32);
        for i in 0..m {
            t.data[i * m + i] = Scalar::one();
        }
        t
    }
    /// flip^{ab}_{cd} = delta^a_d delta^b_c
    pub fn flip(n: usize) -> Self {
        let mut t = Tensor::mixed(n, 2, 2);
        for a in 0..n {
            for b in 0..n {
                t.set(&[a, b, b, a], Scalar::one());
            }
        }
        t
    }
    pub fn from_fn(shape: Vec<usize>, upper: Vec<bool>, f: impl Fn(&[usize]) -> Scalar + Sync) -> Self {
        let mut t = Tensor::zeros(shape, upper);
        let shape = t.shape.clone();
        let st = strides(&shape);
        t.data = (0..t.data.len())
            .into_par_iter()
            .map(|flat| {
                let idx: Vec<usize> = st.iter().zip(&shape).map(|(s, d)| (flat / s) % d).collect();
                f(&idx)
            })
            .collect();
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn upper_legs(&self) -> &[bool] {
        &self.upper
    }
    pub fn len(&self) -> usize {
        self.data.len()
    }
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }
    fn flat(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len(), "index arity");
        let mut f = 0;
        for (i, d) in idx.iter().zip(&self.shape) {
            debug_assert!(i < d);
            f = f * d + i;
        }
        f
    }
    fn unflat(&self, mut f: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for k in (0..self.shape.len()).rev() {
            idx[k] = f % self.shape[k];
            f /= self.shape[k];
        }
        idx
    }
    pub fn get(&self, idx: &[usize]) -> &Scalar {
        &self.data[self.flat(idx)]
    }
    pub fn set(&mut self, idx: &[usize], v: Scalar) {
        let f = self.flat(idx);
        self.data[f] = v;
    }

    fn legs(&self, up: bool) -> Vec<usize> {
        (0..self.shape.len()).filter(|&k| self.upper[k] == up).collect()
    }
    /// Rows and columns of the matrix view.
    pub fn matrix_dims(&self) -> (usize, usize) {
        let r = self.legs(true).iter().map(|&k| self.shape[k]).product();
        let c = self.legs(false).iter().map(|&k| self.shape[k]).product();
        (r, c)
    }
    /// The matrix view as rows of entries.
    pub fn to_matrix(&self) -> Vec<Vec<Scalar>> {
        let canon = self.canonical_order();
        let (r, c) = canon.matrix_dims();
        (0..r).map(|i| canon.data[i * c..(i + 1) * c].to_vec()).collect()
    }
    /// Same tensor with all upper legs moved in front (order kept).
    fn canonical_order(&self) -> Tensor {
        let mut perm = self.legs(true);
        perm.extend(self.legs(false));
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        self.permute(&perm).expect("valid permutation")
    }
    fn from_matrix(rows_shape: &[usize], cols_shape: &[usize], m: Vec<Scalar>) -> Tensor {
        let mut shape = rows_shape.to_vec();
        shape.extend_from_slice(cols_shape);
        let mut upper = vec![true; rows_shape.len()];
        upper.extend(vec![false; cols_shape.len()]);
        Tensor { shape, upper, data: m }
    }

    fn same_layout(&self, o: &Tensor) -> Result<(), TensorError> {
        if self.shape != o.shape || self.upper != o.upper {
            return Err(TensorError::Shape(format!("{:?} vs {:?}", self.shape, o.shape)));
        }
        Ok(())
    }
    pub fn add(&self, o: &Tensor) -> Result<Tensor, TensorError> {
        self.same_layout(o)?;
        let data = self.data.par_iter().zip(&o.data).map(|(a, b)| a.add(b)).collect();
        Ok(Tensor { shape: self.shape.clone(), upper: self.upper.clone(), data })
    }
    pub fn sub(&self, o: &Tensor) -> Result<Tensor, TensorError> {
        self.same_layout(o)?;
        let data = self.data.par_iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Ok(Tensor { shape: self.shape.clone(), upper: self.upper.clone(), data })
    }
    pub fn scale(&self, s: &Scalar) -> Tensor {
        let data = self.data.par_iter().map(|a| a.mul(s)).collect();
        Tensor { shape: self.shape.clone(), upper: self.upper.clone(), data }
    }
    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar + Sync + Send) -> Tensor {
        let data = self.data.par_iter().map(f).collect();
        Tensor { shape: self.shape.clone(), upper: self.upper.clone(), data }
    }
    pub fn try_map<E: Send>(&self, f: impl Fn(&Scalar) -> Result<Scalar, E> + Sync + Send) -> Result<Tensor, E> {
        let data = self.data.par_iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Tensor { shape: self.shape.clone(), upper: self.upper.clone(), data })
    }
    /// Linear combination `sum c_i T_i` of same-layout tensors.
    pub fn combine(terms: &[(Scalar, &Tensor)]) -> Result<Tensor, TensorError> {
        let first = terms.first().ok_or_else(|| TensorError::Shape("empty combination".into()))?.1;
        for (_, t) in terms {
            first.same_layout(t)?;
        }
        let data = (0..first.data.len())
            .into_par_iter()
            .map(|k| {
                let mut acc = Scalar::zero();
                for (c, t) in terms {
                    if !t.data[k].is_zero() {
                        acc = acc.add(&c.mul(&t.data[k]));
                    }
                }
                acc
            })
            .collect();
        Ok(Tensor { shape: first.shape.clone(), upper: first.upper.clone(), data })
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }
    /// First nonzero entry as (index, value).
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, Scalar)> {
        self.data.iter().position(|s| !s.is_zero()).map(|k| (self.unflat(k), self.data[k].clone()))
    }
    pub fn equals(&self, o: &Tensor) -> bool {
        self.sub(o).map(|d| d.is_zero()).unwrap_or(false)
    }
    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|s| !s.is_zero()).count()
    }

    /// Matrix product of the views: A's lower legs pair with B's upper legs.
    pub fn compose(&self, b: &Tensor) -> Result<Tensor, TensorError> {
        let a = self.canonical_order();
        let b = b.canonical_order();
        let a_cols: Vec<usize> = a.legs(false).iter().map(|&k| a.shape[k]).collect();
        let b_rows: Vec<usize> = b.legs(true).iter().map(|&k| b.shape[k]).collect();
        if a_cols != b_rows {
            return Err(TensorError::Shape(format!("compose {:?} with {:?}", a.shape, b.shape)));
        }
        let a_rows: Vec<usize> = a.legs(true).iter().map(|&k| a.shape[k]).collect();
        let b_cols: Vec<usize> = b.legs(false).iter().map(|&k| b.shape[k]).collect();
        let (m, k) = a.matrix_dims();
        let (_, n) = b.matrix_dims();
        let b_sparse: Vec<Vec<(usize, &Scalar)>> = (0..k)
            .map(|i| (0..n).filter_map(|j| {
                let s = &b.data[i * n + j];
                (!s.is_zero()).then_some((j, s))
            }).collect())
            .collect();
        let rows: Vec<Vec<Scalar>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row = vec![Scalar::zero(); n];
                for kk in 0..k {
                    let x = &a.data[i * k + kk];
                    if x.is_zero() {
                        continue;
                    }
                    for &(j, y) in &b_sparse[kk] {
                        row[j] = row[j].add(&x.mul(y));
                    }
                }
                row
            })
            .collect();
        Ok(Tensor::from_matrix(&a_rows, &b_cols, rows.into_iter().flatten().collect()))
    }

    /// Tensor product: upper legs of A then B, lower legs of A then B.
    pub fn kron(&self, b: &Tensor) -> Tensor {
        let a = self.canonical_order();
        let b = b.canonical_order();
        let dims = |t: &Tensor, up: bool| -> Vec<usize> { t.legs(up).iter().map(|&k| t.shape[k]).collect() };
        let (ar, ac) = a.matrix_dims();
        let (br, bc) = b.matrix_dims();
        let mut rows_shape = dims(&a, true);
        rows_shape.extend(dims(&b, true));
        let mut cols_shape = dims(&a, false);
        cols_shape.extend(dims(&b, false));
        let (m, n) = (ar * br, ac * bc);
        let data: Vec<Scalar> = (0..m * n)
            .into_par_iter()
            .map(|f| {
                let (i, j) = (f / n, f % n);
                let (i1, i2) = (i / br, i % br);
                let (j1, j2) = (j / bc, j % bc);
                let x = &a.data[i1 * ac + j1];
                if x.is_zero() {
                    return Scalar::zero();
                }
                x.mul(&b.data[i2 * bc + j2])
            })
            .collect();
        Tensor::from_matrix(&rows_shape, &cols_shape, data)
    }

    /// Result leg k is this tensor's leg `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor, TensorError> {
        let r = self.shape.len();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::Shape(format!("bad permutation {:?}", perm)));
        }
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let upper: Vec<bool> = perm.iter().map(|&p| self.upper[p]).collect();
        let st = strides(&self.shape);
        let out = Tensor::zeros(shape.clone(), upper.clone());
        let data = (0..out.data.len())
            .into_par_iter()
            .map(|f| {
                let idx = out.unflat(f);
                let src: usize = perm.iter().enumerate().map(|(k, &p)| idx[k] * st[p]).sum();
                self.data[src].clone()
            })
            .collect();
        Ok(Tensor { shape, upper, data })
    }

    /// Trace over legs `i` and `j`.
    pub fn contract(&self, i: usize, j: usize) -> Result<Tensor, TensorError> {
        let r = self.shape.len();
        if i == j || i >= r || j >= r || self.shape[i] != self.shape[j] {
            return Err(TensorError::Shape(format!("cannot contract legs {} and {}", i, j)));
        }
        let keep: Vec<usize> = (0..r).filter(|&k| k != i && k != j).collect();
        let shape: Vec<usize> = keep.iter().map(|&k| self.shape[k]).collect();
        let upper: Vec<bool> = keep.iter().map(|&k| self.upper[k]).collect();
        let mut out = Tensor::zeros(shape, upper);
        for f in 0..out.data.len() {
            let idx = out.unflat(f);
            let mut full = vec![0; r];
            for (k, &leg) in keep.iter().enumerate() {
                full[leg] = idx[k];
            }
            let mut acc = Scalar::zero();
            for t in 0..self.shape[i] {
                full[i] = t;
                full[j] = t;
                acc = acc.add(self.get(&full));
            }
            out.data[f] = acc;
        }
        Ok(out)
    }

    pub fn eval(&self, pt: &Point) -> Result<Tensor, ScalarError> {
        self.try_map(|s| pt.eval(s).map(Scalar::from_coeff))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .data
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_zero())
            .map(|(k, s)| {
                let idx: Vec<usize> = self.unflat(k).iter().map(|i| i + 1).collect();
                json!({"idx": idx, "val": s.to_string()})
            })
            .collect();
        json!({"shape": self.shape, "entries": entries})
    }

    /// Rank of the matrix view over the rational-function field.
    pub fn rank(&self) -> usize {
        rank_exact(&self.to_matrix())
    }
}

/// Rank over the rational-function field.
///
/// The matrix is split into independent blocks (connected components of
/// the nonzero pattern); each block is cleared of denominators and run
/// through fraction-free elimination.
pub fn rank_exact(m: &[Vec<Scalar>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    // union-find over rows and columns
    let mut parent: Vec<usize> = (0..rows + cols).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, row) in m.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            if !s.is_zero() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, rows + j));
                parent[a] = b;
            }
        }
    }
    let mut blocks: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in 0..rows {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().0.push(i);
    }
    for j in 0..cols {
        let root = find(&mut parent, rows + j);
        blocks.entry(root).or_default().1.push(j);
    }
    let blocks: Vec<_> = blocks.into_values().filter(|(r, c)| !r.is_empty() && !c.is_empty()).collect();
    blocks
        .par_iter()
        .map(|(rs, cs)| {
            let sub: Vec<Vec<LPoly>> = rs
                .iter()
                .map(|&i| clear_denominators(&cs.iter().map(|&j| m[i][j].clone()).collect::<Vec<_>>()))
                .collect();
            bareiss_rank(sub)
        })
        .sum()
}

fn clear_denominators(row: &[Scalar]) -> Vec<LPoly> {
    let mut common = Scalar::one();
    for s in row {
        for (f, e) in s.denom_factors() {
            let have = common.denom_factors().iter().find(|(g, _)| g == f).map_or(0, |p| p.1);
            if *e > have {
                common = common.mul(&Scalar::from_poly(f.pow(e - have)));
            }
        }
    }
    // `common` is the product of the needed factors, kept as a polynomial.
    row.iter()
        .map(|s| {
            let t = s.mul(&common);
            debug_assert!(t.is_polynomial());
            t.numer().clone()
        })
        .collect()
}

fn bareiss_rank(mut a: Vec<Vec<LPoly>>) -> usize {
    let cols = a.first().map_or(0, |r| r.len());
    let mut prev = LPoly::one();
    let mut rank = 0;
    let mut active: Vec<usize> = (0..a.len()).collect();
    for col in 0..cols {
        let piv = active
            .iter()
            .copied()
            .filter(|&i| !a[i][col].is_zero())
            .min_by_key(|&i| a[i][col].len());
        let p = match piv {
            Some(p) => p,
            None => continue,
        };
        active.retain(|&i| i != p);
        let pv = a[p][col].clone();
        let prow = a[p].clone();
        for &i in &active {
            let f = a[i][col].clone();
            for j in col..cols {
                let v = pv.mul(&a[i][j]).sub(&f.mul(&prow[j]));
                a[i][j] = v.div_exact(&prev).unwrap_or(v);
            }
        }
        prev = pv;
        rank += 1;
        if active.is_empty() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_squares_to_identity() {
        let f = Tensor::flip(3);
        assert!(f.compose(&f).unwrap().equals(&Tensor::identity(3, 2)));
    }

    #[test]
    fn identity_law() {
        let t = Tensor::from_fn(vec![2, 2, 2, 2], vec![true, true, false, false], |i| {
            Scalar::r(i.iter().sum::<usize>() as i32)
        });
        assert!(Tensor::identity(2, 2).compose(&t).unwrap().equals(&t));
    }

    #[test]
    fn rank_of_outer_product_is_one() {
        let t = Tensor::from_fn(vec![3, 3], vec![true, false], |i| {
            Scalar::r(i[0] as i32).mul(&Scalar::mu().pow(i[1] as i32).unwrap())
        });
        assert_eq!(t.rank(), 1);
        assert_eq!(Tensor::identity(4, 1).rank(), 4);
    }

    #[test]
    fn contraction_of_identity_is_trace() {
        let t = Tensor::identity(3, 1).contract(0, 1).unwrap();
        assert_eq!(t.entries()[0], Scalar::from_int(3));
    }

    #[test]
    fn permutation_composition_is_action() {
        let t = Tensor::from_fn(vec![2, 3, 4], vec![true, true, false], |i| {
            Scalar::from_int((i[0] * 100 + i[1] * 10 + i[2]) as i64)
        });
        let p = [1, 2, 0];
        let q = [2, 0, 1];
        let pq: Vec<usize> = (0..3).map(|k| p[q[k]]).collect();
        let lhs = t.permute(&p).unwrap().permute(&q).unwrap();
        assert_eq!(lhs, t.permute(&pq).unwrap());
    }
}
