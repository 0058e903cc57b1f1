//! The ISO(3,1) real form of the N = 4 plane: real coordinates X, real
//! forms dX, hermitian momenta P and their commutation blocks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{FileParseError, ParsedRelation};
use crate::planealg::{build_relations, Element, Involution, Letter, PlaneError, RelationSet, Table, Word};
use crate::report::VerificationReport;
use crate::rmatrix::{sample_points, RMatrixBundle, RMatrixError};
use crate::scalar::{Coeff, Gauss, ParameterContext, Point, Rat, Scalar, ScalarError, Sym, Twist};
use crate::tensor::Tensor;

use Letter::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinkowskiError {
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error("fixture parse error: {0}")]
    Fixture(#[from] FileParseError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
}

pub type Mat = Vec<Vec<Scalar>>;

/// Commutation blocks, named by the word type of their left sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    XX,
    XdX,
    DXdX,
    PX,
    PP,
}

impl Block {
    pub fn all() -> [Block; 5] {
        [Block::XX, Block::XdX, Block::DXdX, Block::PX, Block::PP]
    }
    /// Name of the Table 3 rows the block is transported from.
    fn source(&self) -> &'static str {
        match self {
            Block::XX => "P_A xx",
            Block::XdX => "x dx = r Rhat dx x",
            Block::DXdX => "dx dx = -r Rhat dx dx",
            Block::PX => "pd x = r Rhat x pd + delta",
            Block::PP => "P_A dd",
        }
    }
    /// Words eliminated by the block, in output order.
    pub fn pivots(&self) -> Vec<Word> {
        let w = |a: Letter, b: Letter| Word::from_letters(&[a, b]);
        let mut out = Vec::new();
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                match self {
                    Block::XX if a > b => out.push(w(RX(a), RX(b))),
                    Block::PP if a > b => out.push(w(RP(a), RP(b))),
                    Block::DXdX if a <= b => out.push(w(RDX(a), RDX(b))),
                    Block::XdX => out.push(w(RX(a), RDX(b))),
                    Block::PX => out.push(w(RP(a), RX(b))),
                    _ => {}
                }
            }
        }
        out
    }
    /// Words left on the right-hand sides.
    pub fn normals(&self) -> Vec<Word> {
        let w = |a: Letter, b: Letter| Word::from_letters(&[a, b]);
        let mut out = Vec::new();
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                match self {
                    Block::XX if a <= b => out.push(w(RX(a), RX(b))),
                    Block::PP if a <= b => out.push(w(RP(a), RP(b))),
                    Block::DXdX if a > b => out.push(w(RDX(a), RDX(b))),
                    Block::XdX => out.push(w(RDX(a), RX(b))),
                    Block::PX => out.push(w(RX(a), RP(b))),
                    _ => {}
                }
            }
        }
        out
    }
    /// Block a two-letter word belongs to.
    pub fn of_word(w: &Word) -> Option<Block> {
        match w.letters() {
            [RX(_), RX(_)] => Some(Block::XX),
            [RX(_), RDX(_)] | [RDX(_), RX(_)] => Some(Block::XdX),
            [RDX(_), RDX(_)] => Some(Block::DXdX),
            [RP(_), RX(_)] | [RX(_), RP(_)] => Some(Block::PX),
            [RP(_), RP(_)] => Some(Block::PP),
            _ => None,
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Block::XX => "XX",
            Block::XdX => "XdX",
            Block::DXdX => "dXdX",
            Block::PX => "PX",
            Block::PP => "PP",
        };
        write!(f, "{}", s)
    }
}

impl FromStr for Block {
    type Err = MinkowskiError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Block::all()
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| MinkowskiError::UnknownBlock(s.to_string()))
    }
}

/// Real-form data of the N = 4 plane.
#[derive(Clone, Debug)]
pub struct RealFormData {
    pub bundle: RMatrixBundle,
    pub t3: RelationSet,
    /// The swap 𝒟 of the two middle indices, 0-based.
    pub swap: Vec<usize>,
    /// X^a = M^a_b x^b, stored m[a][b].
    pub m: Mat,
    pub m_inv: Mat,
    /// C' = (M^{-1})^T C M^{-1}.
    pub c_prime: Mat,
    /// P_a = -i hbar N_a^b pd_b, stored n[a][b].
    pub n_mat: Mat,
    pub n_inv: Mat,
    /// E_a^b = N_a^c M^b_c, stored e[a][b].
    pub e: Mat,
    /// S^{bc}_{ad} stored at [b, c, a, d].
    pub s: Tensor,
    /// ε_a: +1 below the middle pair, -1 above, 0 on it.
    pub eps: Vec<i8>,
    /// d_a^{1/2} as a monomial in r.
    pub d_half: Vec<Scalar>,
}

fn half() -> Scalar {
    Scalar::from_frac(1, 2)
}

fn inv_sqrt2() -> Scalar {
    Scalar::sqrt2().mul(&half())
}

/// Square root of a monic monomial r^k.
fn sqrt_r_monomial(s: &Scalar) -> Result<Scalar, MinkowskiError> {
    let bad = || MinkowskiError::Consistency(format!("d entry {} is not a power of r", s));
    if !s.is_polynomial() {
        return Err(bad());
    }
    let (m, c) = s.numer().as_monomial().ok_or_else(bad)?;
    if !c.is_one() || m.0.iter().any(|&(sym, _)| sym != Sym::R) {
        return Err(bad());
    }
    Ok(Scalar::r_half(m.exp(Sym::R) / 2))
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Scalar::zero();
                    for l in 0..k {
                        if !a[i][l].is_zero() && !b[l][j].is_zero() {
                            acc = acc.add(&a[i][l].mul(&b[l][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

fn is_identity(a: &Mat) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, v)| if i == j { v.is_one() || v.equals(&Scalar::one()) } else { v.is_zero() }))
}

/// Gauss-Jordan inverse over the scalar field.
pub fn mat_inv(a: &Mat) -> Result<Mat, MinkowskiError> {
    let n = a.len();
    let mut w: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !w[r][col].is_zero())
            .ok_or_else(|| MinkowskiError::Consistency("singular matrix".into()))?;
        w.swap(col, p);
        let inv = w[col][col].inv()?;
        w[col] = w[col].iter().map(|v| v.mul(&inv)).collect();
        for r in 0..n {
            if r != col && !w[r][col].is_zero() {
                let f = w[r][col].clone();
                let pivot_row = w[col].clone();
                for (x, y) in w[r].iter_mut().zip(pivot_row.iter()) {
                    if !y.is_zero() {
                        *x = x.sub(&f.mul(y));
                    }
                }
            }
        }
    }
    Ok(w.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Build the real-form data for the Minkowski parameters (N = 4).
pub fn build_real_form(ctx: &ParameterContext) -> Result<RealFormData, MinkowskiError> {
    if ctx.n != 4 {
        return Err(MinkowskiError::Domain(format!("the packaged real form needs N = 4, got N = {}", ctx.n)));
    }
    if ctx.twist != Twist::Minkowski || !ctx.real_form {
        return Err(MinkowskiError::Domain("the real form needs the Minkowski parameter context".into()));
    }
    build_real_form_from(RMatrixBundle::build(ctx)?)
}

/// Same as [`build_real_form`] on an already built R-matrix bundle, e.g.
/// one with a non-default convention.
pub fn build_real_form_from(bundle: RMatrixBundle) -> Result<RealFormData, MinkowskiError> {
    let ctx = &bundle.ctx.clone();
    if ctx.n != 4 || ctx.twist != Twist::Minkowski {
        return Err(MinkowskiError::Domain("the real form needs the Minkowski parameter context".into()));
    }
    let t3 = build_relations(&bundle, Table::T3, None)?;
    let nn = ctx.n;
    let h = nn / 2;
    let swap: Vec<usize> = (1..=nn).map(|a| ctx.dswap(a) - 1).collect();
    let prime = |a: usize| nn - 1 - a;
    let d_half = bundle.dvec.iter().map(sqrt_r_monomial).collect::<Result<Vec<_>, _>>()?;
    let zero = || vec![vec![Scalar::zero(); nn]; nn];
    let s2 = inv_sqrt2();
    let i = Scalar::i();

    // 0-based: a < h - 1 is "a < n", a == h - 1 is n, a == h is n + 1.
    let mut m = zero();
    for a in 0..nn {
        let ap = prime(a);
        if a < h {
            m[a][a] = m[a][a].add(&s2);
            m[a][ap] = m[a][ap].add(&s2);
        } else if a == h {
            m[a][h - 1] = i.mul(&s2);
            m[a][h] = i.mul(&s2).neg();
        } else {
            m[a][a] = s2.clone();
            m[a][ap] = s2.neg();
        }
    }
    // tilde-pd_a = r^{N/2} d_a^{-1/2} pd_a
    let t: Vec<Scalar> = d_half.iter().map(|d| Ok(Scalar::r_half(nn as i32).mul(&d.inv()?))).collect::<Result<_, ScalarError>>()?;
    let mut n_mat = zero();
    for a in 0..nn {
        let ap = prime(a);
        if a < h {
            n_mat[a][a] = n_mat[a][a].add(&t[a].mul(&s2));
            n_mat[a][ap] = n_mat[a][ap].add(&t[ap].mul(&s2));
        } else if a == h {
            // P_{n+1} = -hbar/sqrt2 (t_n - t_{n+1}) = -i hbar (-i/sqrt2)(...)
            n_mat[a][h - 1] = t[h - 1].mul(&i).mul(&s2).neg();
            n_mat[a][h] = t[h].mul(&i).mul(&s2);
        } else {
            n_mat[a][a] = t[a].mul(&s2);
            n_mat[a][ap] = t[ap].mul(&s2).neg();
        }
    }
    let eps: Vec<i8> = (0..nn).map(|a| if a + 1 < h { 1 } else if a > h { -1 } else { 0 }).collect();
    let m_inv = mat_inv(&m)?;
    let n_inv = mat_inv(&n_mat)?;
    let c: Mat = (0..nn).map(|a| (0..nn).map(|b| bundle.c_low.get(&[a, b]).clone()).collect()).collect();
    let c_prime = mat_mul(&mat_mul(&transpose(&m_inv), &c), &m_inv);
    let e = mat_mul(&n_mat, &transpose(&m));

    let mut s = Tensor::zeros(vec![nn; 4], vec![true, true, false, false]);
    let mut acc: BTreeMap<[usize; 4], Scalar> = BTreeMap::new();
    for f in 0..nn {
        for hh in 0..nn {
            for ee in 0..nn {
                for g in 0..nn {
                    let rv = bundle.rhat.get(&[f, hh, ee, g]);
                    if rv.is_zero() {
                        continue;
                    }
                    for a in (0..nn).filter(|&a| !n_mat[a][ee].is_zero()) {
                        for b in (0..nn).filter(|&b| !m[b][f].is_zero()) {
                            for d in (0..nn).filter(|&d| !m_inv[g][d].is_zero()) {
                                for cc in (0..nn).filter(|&cc| !n_inv[hh][cc].is_zero()) {
                                    let v = n_mat[a][ee].mul(&m[b][f]).mul(rv).mul(&m_inv[g][d]).mul(&n_inv[hh][cc]);
                                    let slot = acc.entry([b, cc, a, d]).or_insert_with(Scalar::zero);
                                    *slot = slot.add(&v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for (k, v) in acc {
        s.set(&k, v);
    }

    let data = RealFormData { bundle, t3, swap, m, m_inv, c_prime, n_mat, n_inv, e, s, eps, d_half };
    data.assert_invariants()?;
    Ok(data)
}

impl RealFormData {
    pub fn ctx(&self) -> &ParameterContext {
        &self.bundle.ctx
    }
    pub fn n(&self) -> usize {
        self.bundle.ctx.n
    }

    fn conj(&self, s: &Scalar) -> Result<Scalar, ScalarError> {
        self.ctx().conj(s)
    }

    fn assert_invariants(&self) -> Result<(), MinkowskiError> {
        let nn = self.n();
        let bad = |what: String| Err(MinkowskiError::Consistency(what));
        if !is_identity(&mat_mul(&self.m, &self.m_inv)) || !is_identity(&mat_mul(&self.n_mat, &self.n_inv)) {
            return bad("M or N inverse check".into());
        }
        for a in 0..nn {
            for b in 0..nn {
                if !self.conj(&self.m[a][self.swap[b]])?.equals(&self.m[a][b]) {
                    return bad(format!("conj(M) D != M at ({}, {})", a + 1, b + 1));
                }
                if !self.conj(&self.c_prime[b][a])?.equals(&self.c_prime[a][b]) {
                    return bad(format!("C' is not hermitian at ({}, {})", a + 1, b + 1));
                }
            }
        }
        Ok(())
    }

    /// Rewrite plane generators x, dx, pd in the real basis X, dX, P.
    pub fn to_real(&self, e: &Element) -> Element {
        let nn = self.n();
        let ih = Scalar::i().mul(&Scalar::hbar().inv().expect("hbar is a unit"));
        let lin = |row: &[Scalar], f: fn(u8) -> Letter, k: &Scalar| {
            let mut out = Element::zero();
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.add_term(Word::from_letters(&[f(b as u8 + 1)]), v.mul(k));
                }
            }
            out
        };
        let one = Scalar::one();
        e.substitute(&|l| match l {
            X(a) if (a as usize) <= nn => lin(&self.m_inv[a as usize - 1], RX, &one),
            DX(a) if (a as usize) <= nn => lin(&self.m_inv[a as usize - 1], RDX, &one),
            PD(a) if (a as usize) <= nn => lin(&self.n_inv[a as usize - 1], RP, &ih),
            other => Element::letter(other),
        })
    }

    /// Rewrite X, dX, P in terms of the plane generators.
    pub fn to_plane(&self, e: &Element) -> Element {
        let mih = Scalar::i().mul(&Scalar::hbar()).neg();
        let lin = |row: &[Scalar], f: fn(u8) -> Letter, k: &Scalar| {
            let mut out = Element::zero();
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    out.add_term(Word::from_letters(&[f(b as u8 + 1)]), v.mul(k));
                }
            }
            out
        };
        let one = Scalar::one();
        e.substitute(&|l| match l {
            RX(a) => lin(&self.m[a as usize - 1], X, &one),
            RDX(a) => lin(&self.m[a as usize - 1], DX, &one),
            RP(a) => lin(&self.n_mat[a as usize - 1], PD, &mih),
            other => Element::letter(other),
        })
    }

    /// The plane conjugation carried to the real basis.
    pub fn star(&self, e: &Element) -> Result<Element, MinkowskiError> {
        let inv = Involution::new(&self.bundle)?;
        Ok(self.to_real(&inv.apply(&self.to_plane(e))?))
    }
}

/// P_a(X^b) from the closed form: diagonal -(1/2) i hbar r^{N/2}(d^{1/2} + d^{-1/2}),
/// primed entry -(1/2) i hbar ε_a r^{N/2}(d^{1/2} - d^{-1/2}).
pub fn momenta_action(data: &RealFormData) -> Result<Mat, MinkowskiError> {
    let nn = data.n();
    let k = Scalar::i().mul(&Scalar::hbar()).mul(&Scalar::r_half(nn as i32)).mul(&half()).neg();
    let mut out = vec![vec![Scalar::zero(); nn]; nn];
    for a in 0..nn {
        let dh = &data.d_half[a];
        let dhi = dh.inv()?;
        out[a][a] = k.mul(&dh.add(&dhi));
        if data.eps[a] != 0 {
            let ap = nn - 1 - a;
            out[a][ap] = k.mul(&Scalar::from_int(data.eps[a] as i64)).mul(&dh.sub(&dhi));
        }
    }
    Ok(out)
}

/// One derived relation `lhs = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRule {
    pub lhs: Word,
    pub rhs: Element,
}

impl BlockRule {
    /// lhs - rhs.
    pub fn relation(&self) -> Element {
        Element::word(self.lhs.clone()).sub(&self.rhs)
    }
}

#[derive(Clone, Debug)]
pub struct DerivedBlock {
    pub block: Block,
    pub rules: Vec<BlockRule>,
}

impl DerivedBlock {
    pub fn rule(&self, lhs: &Word) -> Option<&BlockRule> {
        self.rules.iter().find(|r| &r.lhs == lhs)
    }
}

/// Replace every pivot word of the given blocks by its right side.
pub fn reduce(e: &Element, blocks: &[DerivedBlock]) -> Element {
    let mut out = Element::zero();
    for (w, c) in e.terms() {
        match blocks.iter().find_map(|b| b.rule(w)) {
            Some(r) => out.add_scaled(&r.rhs, c),
            None => out.add_term(w.clone(), c.clone()),
        }
    }
    out
}

trait Field: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Rough size, used to pick small pivots.
    fn weight(&self) -> usize;
}

impl Field for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn mul(&self, o: &Self) -> Self {
        Scalar::mul(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Scalar::sub(self, o)
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::add(self, o)
    }
    fn inv(&self) -> Option<Self> {
        Scalar::inv(self).ok()
    }
    fn weight(&self) -> usize {
        self.numer().len() + self.denom_factors().iter().map(|(p, e)| p.len() * *e as usize).sum::<usize>()
    }
}

impl Field for Coeff {
    fn zero() -> Self {
        Coeff::zero()
    }
    fn is_zero(&self) -> bool {
        Coeff::is_zero(self)
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn inv(&self) -> Option<Self> {
        Coeff::inv(self)
    }
    fn weight(&self) -> usize {
        0
    }
}

/// Solve the rows for the first `npiv` columns. Returns, per pivot column,
/// the normalized row; fails when a pivot column cannot be eliminated or
/// a relation survives among the remaining columns.
fn eliminate<F: Field>(mut rows: Vec<Vec<F>>, npiv: usize) -> Result<Vec<Vec<F>>, String> {
    let mut used = vec![false; rows.len()];
    let mut pivot_row = Vec::with_capacity(npiv);
    for col in 0..npiv {
        let p = (0..rows.len())
            .filter(|&r| !used[r] && !rows[r][col].is_zero())
            .min_by_key(|&r| rows[r][col].weight())
            .ok_or_else(|| format!("pivot column {} cannot be eliminated", col))?;
        used[p] = true;
        let inv = rows[p][col].inv().ok_or("zero pivot")?;
        rows[p] = rows[p].iter().map(|v| if v.is_zero() { F::zero() } else { v.mul(&inv) }).collect();
        let prow = rows[p].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == p || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(prow.iter()) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
        }
        pivot_row.push(p);
    }
    if let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r].iter().any(|v| !v.is_zero())) {
        return Err(format!("row {} leaves a relation among normal words", r));
    }
    Ok(pivot_row.into_iter().map(|p| rows[p].clone()).collect())
}

/// Columns: pivots, normals, then the constant.
fn row_of<F: Field>(e: &[(Word, F)], cols: &BTreeMap<Word, usize>, width: usize) -> Result<Vec<F>, String> {
    let mut row = vec![F::zero(); width];
    for (w, c) in e {
        let k = if w.is_empty() { width - 1 } else { *cols.get(w).ok_or_else(|| format!("word outside the block: {:?}", w))? };
        row[k] = row[k].add(c);
    }
    Ok(row)
}

fn columns(block: Block) -> (Vec<Word>, Vec<Word>, BTreeMap<Word, usize>) {
    let piv = block.pivots();
    let nor = block.normals();
    let cols = piv.iter().chain(nor.iter()).cloned().enumerate().map(|(k, w)| (w, k)).collect();
    (piv, nor, cols)
}

/// Transport the Table 3 rows of one block to the real basis and solve
/// for the pivot words.
pub fn derive_block(data: &RealFormData, block: Block) -> Result<DerivedBlock, MinkowskiError> {
    let (piv, nor, cols) = columns(block);
    let width = piv.len() + nor.len() + 1;
    let rows: Vec<Vec<Scalar>> = data
        .t3
        .find(block.source())
        .map(|rel| {
            let e = data.to_real(&rel.elem);
            let terms: Vec<(Word, Scalar)> = e.terms().map(|(w, c)| (w.clone(), c.clone())).collect();
            row_of(&terms, &cols, width)
        })
        .collect::<Result<_, _>>()
        .map_err(MinkowskiError::Consistency)?;
    let solved = eliminate(rows, piv.len()).map_err(|e| MinkowskiError::Consistency(format!("{} block: {}", block, e)))?;
    let mut rules = Vec::new();
    for (w, row) in piv.iter().zip(solved) {
        let mut rhs = Element::zero();
        for (k, nw) in nor.iter().enumerate() {
            let v = &row[piv.len() + k];
            if !v.is_zero() {
                rhs.add_term(nw.clone(), v.neg());
            }
        }
        let c = &row[width - 1];
        if !c.is_zero() {
            rhs.add_term(Word::empty(), c.neg());
        }
        if let Some((_, v)) = rhs.terms().find(|(_, v)| v.has_sqrt2()) {
            return Err(MinkowskiError::Consistency(format!("residual sqrt 2 in {} block coefficient {}", block, v)));
        }
        rules.push(BlockRule { lhs: w.clone(), rhs });
    }
    Ok(DerivedBlock { block, rules })
}

/// Derive all five blocks in parallel.
pub fn derive_all(data: &RealFormData) -> Result<Vec<DerivedBlock>, MinkowskiError> {
    Block::all().par_iter().map(|&b| derive_block(data, b)).collect()
}

/// Numeric linear form over words; the empty word is the constant.
type NumForm = BTreeMap<Word, Coeff>;

/// The independent numeric re-derivation at one point: the x-basis rows
/// rebuilt from the evaluated R-matrix, M and N rebuilt from the point,
/// elimination over Q(i, sqrt 2).
#[derive(Clone, Debug)]
pub struct NumericRules {
    pub rules: BTreeMap<Word, NumForm>,
}

fn num_basis(pt: &Point, bundle: &RMatrixBundle) -> Result<(Vec<Vec<Coeff>>, Vec<Vec<Coeff>>), MinkowskiError> {
    let r = pt.get(Sym::R).cloned().ok_or_else(|| ScalarError::UnresolvedSymbol("r".into()))?;
    let rh = pt.eval(&Scalar::r_half(1))?;
    let half = Coeff::from_frac(1, 2);
    let s = &Coeff::sqrt2() * &half;
    let i = Coeff::i();
    let zero = Coeff::zero();
    // d_a^{1/2} is the power of r^{1/2} whose square is the evaluated d_a.
    let mut dh = Vec::new();
    for a in 0..4 {
        let d = bundle.dvec[a].as_constant().ok_or_else(|| MinkowskiError::Consistency("d not numeric".into()))?;
        let cand = (-4..=4).map(|k| rh.pow(k).unwrap()).find(|c| &(c * c) == &d);
        dh.push(cand.ok_or_else(|| MinkowskiError::Consistency("d_a has no r^{k/2} root".into()))?);
    }
    let r2 = &r * &r;
    let t: Vec<Coeff> = dh.iter().map(|d| &r2 * &d.inv().unwrap()).collect();
    let si = &s * &i;
    let m = vec![
        vec![s.clone(), zero.clone(), zero.clone(), s.clone()],
        vec![zero.clone(), s.clone(), s.clone(), zero.clone()],
        vec![zero.clone(), si.clone(), -&si, zero.clone()],
        vec![-&s, zero.clone(), zero.clone(), s.clone()],
    ];
    let n = vec![
        vec![&s * &t[0], zero.clone(), zero.clone(), &s * &t[3]],
        vec![zero.clone(), &s * &t[1], &s * &t[2], zero.clone()],
        vec![zero.clone(), -&(&si * &t[1]), &si * &t[2], zero.clone()],
        vec![-&(&s * &t[0]), zero.clone(), zero.clone(), &s * &t[3]],
    ];
    Ok((m, n))
}

fn num_inv(a: &[Vec<Coeff>]) -> Result<Vec<Vec<Coeff>>, MinkowskiError> {
    let n = a.len();
    let rows: Vec<Vec<Coeff>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Coeff::one() } else { Coeff::zero() }));
            r
        })
        .collect();
    let solved = eliminate(rows, n).map_err(MinkowskiError::Consistency)?;
    Ok(solved.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl NumericRules {
    pub fn at(data: &RealFormData, block: Block, pt: &Point) -> Result<NumericRules, MinkowskiError> {
        let b = data.bundle.eval(pt)?;
        let (m, n) = num_basis(pt, &b)?;
        let mi = num_inv(&m)?;
        let ni = num_inv(&n)?;
        let hbar = pt.get(Sym::Hbar).cloned().ok_or_else(|| ScalarError::UnresolvedSymbol("hbar".into()))?;
        let ih = &Coeff::i() * &hbar.inv().ok_or(ScalarError::DivisionByZero)?;
        let val = |t: &Tensor, idx: [usize; 4]| t.get(&idx).as_constant().unwrap_or_else(Coeff::zero);
        let r = pt.get(Sym::R).cloned().unwrap();
        // Images of x^a, dx^a, pd_a as (letter, coefficient) lists.
        let img = |l: Letter| -> Vec<(Letter, Coeff)> {
            let (row, f, k): (&Vec<Coeff>, fn(u8) -> Letter, Coeff) = match l {
                X(a) => (&mi[a as usize - 1], RX, Coeff::one()),
                DX(a) => (&mi[a as usize - 1], RDX, Coeff::one()),
                PD(a) => (&ni[a as usize - 1], RP, ih.clone()),
                _ => unreachable!(),
            };
            row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (f(j as u8 + 1), &k * v)).collect()
        };
        let mut forms: Vec<NumForm> = Vec::new();
        let add2 = |form: &mut NumForm, a: Letter, bl: Letter, c: &Coeff| {
            if c.is_zero() {
                return;
            }
            for (la, ca) in img(a) {
                for (lb, cb) in img(bl) {
                    let e = form.entry(Word::from_letters(&[la, lb])).or_insert_with(Coeff::zero);
                    *e = &*e + &(&(c * &ca) * &cb);
                }
            }
        };
        let one = Coeff::one();
        for a in 0..4usize {
            for bb in 0..4usize {
                let mut f = NumForm::new();
                let (ua, ub) = (a as u8 + 1, bb as u8 + 1);
                match block {
                    // (P_A)^{ab}_{cd} x^c x^d and (P_A)^{cd}_{ab} pd_d pd_c
                    Block::XX => {
                        for c in 0..4usize {
                            for d in 0..4usize {
                                add2(&mut f, X(c as u8 + 1), X(d as u8 + 1), &val(&b.pa, [a, bb, c, d]));
                            }
                        }
                    }
                    Block::PP => {
                        for c in 0..4usize {
                            for d in 0..4usize {
                                add2(&mut f, PD(d as u8 + 1), PD(c as u8 + 1), &val(&b.pa, [c, d, a, bb]));
                            }
                        }
                    }
                    Block::XdX | Block::DXdX => {
                        let (la, lb) = if block == Block::XdX { (X(ua), DX(ub)) } else { (DX(ua), DX(ub)) };
                        add2(&mut f, la, lb, &one);
                        let sign = if block == Block::XdX { -&r } else { r.clone() };
                        for c in 0..4usize {
                            for d in 0..4usize {
                                let v = &sign * &val(&b.rhat, [a, bb, c, d]);
                                if block == Block::XdX {
                                    add2(&mut f, DX(c as u8 + 1), X(d as u8 + 1), &v);
                                } else {
                                    add2(&mut f, DX(c as u8 + 1), DX(d as u8 + 1), &v);
                                }
                            }
                        }
                    }
                    Block::PX => {
                        // pd_a x^b - r R̂^{be}_{ad} x^d pd_e - δ^b_a
                        add2(&mut f, PD(ua), X(ub), &one);
                        for d in 0..4usize {
                            for e in 0..4usize {
                                let v = -&(&r * &val(&b.rhat, [bb, e, a, d]));
                                add2(&mut f, X(d as u8 + 1), PD(e as u8 + 1), &v);
                            }
                        }
                        if a == bb {
                            let e = f.entry(Word::empty()).or_insert_with(Coeff::zero);
                            *e = &*e - &one;
                        }
                    }
                }
                forms.push(f);
            }
        }
        let (piv, nor, cols) = columns(block);
        let width = piv.len() + nor.len() + 1;
        let rows = forms
            .iter()
            .map(|f| {
                let terms: Vec<(Word, Coeff)> = f.iter().filter(|(_, c)| !c.is_zero()).map(|(w, c)| (w.clone(), c.clone())).collect();
                row_of(&terms, &cols, width)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(MinkowskiError::Consistency)?;
        let solved = eliminate(rows, piv.len()).map_err(MinkowskiError::Consistency)?;
        let mut rules = BTreeMap::new();
        for (w, row) in piv.iter().zip(solved) {
            let mut rhs = NumForm::new();
            for (k, nw) in nor.iter().enumerate() {
                let v = &row[piv.len() + k];
                if !v.is_zero() {
                    rhs.insert(nw.clone(), -v);
                }
            }
            if !row[width - 1].is_zero() {
                rhs.insert(Word::empty(), -&row[width - 1]);
            }
            rules.insert(w.clone(), rhs);
        }
        Ok(NumericRules { rules })
    }

    /// Reduce a numeric form by the rules.
    pub fn reduce(&self, f: &NumForm) -> NumForm {
        let mut out = NumForm::new();
        for (w, c) in f {
            match self.rules.get(w) {
                Some(rhs) => {
                    for (w2, c2) in rhs {
                        let e = out.entry(w2.clone()).or_insert_with(Coeff::zero);
                        *e = &*e + &(c * c2);
                    }
                }
                None => {
                    let e = out.entry(w.clone()).or_insert_with(Coeff::zero);
                    *e = &*e + c;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

fn eval_element(e: &Element, pt: &Point) -> Result<NumForm, ScalarError> {
    let mut f = NumForm::new();
    for (w, c) in e.terms() {
        let v = pt.eval(c)?;
        if !v.is_zero() {
            f.insert(w.clone(), v);
        }
    }
    Ok(f)
}

fn render_num(f: &NumForm) -> String {
    f.iter().map(|(w, c)| format!("{}*{}", c, if w.is_empty() { "1".into() } else { w.render(4) })).collect::<Vec<_>>().join(" + ")
}

/// Compare each derived block with its numeric re-derivation at `k`
/// unit-circle points; zero tolerance.
pub fn numeric_oracle(data: &RealFormData, blocks: &[DerivedBlock], k: usize) -> VerificationReport {
    let pts = sample_points(data.ctx(), k);
    let mut rep = VerificationReport::new("numeric oracle");
    let results: Vec<(String, Result<(), String>)> = blocks
        .par_iter()
        .flat_map(|blk| {
            pts.par_iter().enumerate().map(move |(pi, pt)| {
                let name = format!("{} block at point {}", blk.block, pi + 1);
                let out = (|| -> Result<(), String> {
                    let num = NumericRules::at(data, blk.block, pt).map_err(|e| e.to_string())?;
                    for rule in &blk.rules {
                        let sym = eval_element(&rule.rhs, pt).map_err(|e| e.to_string())?;
                        let want = num.rules.get(&rule.lhs).cloned().unwrap_or_default();
                        if sym != want {
                            return Err(format!("{}: symbolic {} vs numeric {}", rule.lhs.render(4), render_num(&sym), render_num(&want)));
                        }
                    }
                    Ok(())
                })();
                (name, out)
            })
        })
        .collect();
    for (name, out) in results {
        rep.check(name, out);
    }
    rep
}

/// Residual of a relation after reduction by the numeric rules of every
/// block it touches.
pub fn oracle_residual(data: &RealFormData, rel: &Element, pt: &Point) -> Result<Element, MinkowskiError> {
    let mut blocks: Vec<Block> = rel.terms().filter_map(|(w, _)| Block::of_word(w)).collect();
    blocks.sort();
    blocks.dedup();
    let mut f = eval_element(rel, pt)?;
    for b in blocks {
        f = NumericRules::at(data, b, pt)?.reduce(&f);
    }
    let mut out = Element::zero();
    for (w, c) in f {
        out.add_term(w, Scalar::from_coeff(c));
    }
    Ok(out)
}

/// Bundled transcription of the published Minkowski blocks.
pub const MINKOWSKI_FIXTURES: &str = include_str!("../data/minkowski_blocks.rel");

pub fn load_fixtures(ctx: &ParameterContext, text: &str) -> Result<Vec<ParsedRelation>, MinkowskiError> {
    Ok(crate::expr::parse_relation_file(text, ctx)?)
}

/// Subtract each fixture from the derived relations. Mismatches are
/// adjudicated by the numeric oracle at the first sample point.
pub fn compare_fixtures(data: &RealFormData, derived: &[DerivedBlock], fixtures: &[ParsedRelation]) -> VerificationReport {
    let mut rep = VerificationReport::new("fixtures");
    let pt = &sample_points(data.ctx(), 1)[0];
    for f in fixtures {
        let rel = f.lhs.sub(&f.rhs);
        let block = rel.terms().filter_map(|(w, _)| Block::of_word(w)).next();
        let name = format!("{} line {}: {}", block.map_or("?".into(), |b| b.to_string()), f.line, f.text);
        let res = reduce(&rel, derived);
        if res.is_zero() {
            rep.pass(name);
            continue;
        }
        rep.fail(name, res.render(4));
        let verdict = match oracle_residual(data, &rel, pt) {
            Ok(r) if r.is_zero() => "oracle agrees with the fixture".to_string(),
            Ok(_) => {
                let lead = rel.terms().map(|(w, _)| w.clone()).find(|w| derived.iter().any(|b| b.rule(w).is_some()));
                let fix = lead
                    .and_then(|w| derived.iter().find_map(|b| b.rule(&w).cloned()))
                    .map(|r| format!("; derived: {} = {}", r.lhs.render(4), r.rhs.render(4)))
                    .unwrap_or_default();
                format!("oracle sides with the derivation{}", fix)
            }
            Err(e) => format!("oracle error: {}", e),
        };
        rep.note(verdict);
    }
    rep
}

/// Reality of X and dX, hermiticity of P, the shape of the P X
/// commutation and closure of every block under the conjugation.
pub fn hermiticity_check(data: &RealFormData, derived: &[DerivedBlock]) -> VerificationReport {
    let mut rep = VerificationReport::new("hermiticity");
    let nn = data.n();
    for (name, f) in [("X^a is real", RX as fn(u8) -> Letter), ("dX^a is real", RDX), ("P_a is hermitian", RP)] {
        let out = (1..=nn as u8).try_for_each(|a| {
            let x = Element::letter(f(a));
            match data.star(&x) {
                Ok(s) if s.sub(&x).is_zero() => Ok(()),
                Ok(s) => Err(format!("{}* = {}", x.render(nn), s.render(nn))),
                Err(e) => Err(e.to_string()),
            }
        });
        rep.check(name, out);
    }
    let ih = Scalar::i().mul(&Scalar::hbar().inv().expect("unit"));
    let e_check = momenta_action(data).map_err(|e| e.to_string()).and_then(|pa| {
        for a in 0..nn {
            for b in 0..nn {
                if !ih.mul(&pa[a][b]).equals(&data.e[a][b]) {
                    return Err(format!("E({},{}) = {} but (i/hbar) P(X) = {}", a + 1, b + 1, data.e[a][b], ih.mul(&pa[a][b])));
                }
            }
        }
        Ok(())
    });
    rep.check("E = N M^T equals (i/hbar) P_a(X^b)", e_check);
    let e22 = &data.e[1][1];
    rep.check("E(2,2) = r^2", if e22.equals(&Scalar::r(2)) { Ok(()) } else { Err(e22.to_string()) });

    let px = derived.iter().find(|b| b.block == Block::PX);
    let out = match px {
        None => Err("PX block missing".into()),
        Some(px) => (|| {
            let mih = Scalar::i().mul(&Scalar::hbar()).neg();
            for a in 0..nn {
                for b in 0..nn {
                    let mut row = Element::letters(&[RP(a as u8 + 1), RX(b as u8 + 1)], Scalar::one());
                    for c in 0..nn {
                        for d in 0..nn {
                            let v = data.s.get(&[b, c, a, d]);
                            if !v.is_zero() {
                                row.add_term(Word::from_letters(&[RX(d as u8 + 1), RP(c as u8 + 1)]), v.mul(&Scalar::r(1)).neg());
                            }
                        }
                    }
                    row = row.sub(&Element::scalar(mih.mul(&data.e[a][b])));
                    let res = reduce(&row, std::slice::from_ref(px));
                    if !res.is_zero() {
                        return Err(format!("(a,b) = ({},{}): {}", a + 1, b + 1, res.render(nn)));
                    }
                    let rule = px.rule(&Word::from_letters(&[RP(a as u8 + 1), RX(b as u8 + 1)])).ok_or("missing rule")?;
                    if let Some((w, _)) = rule.rhs.terms().find(|(w, _)| !w.is_empty() && !matches!(w.letters(), [RX(_), RP(_)])) {
                        return Err(format!("extra operator {} in P{}X{}", w.render(nn), a + 1, b + 1));
                    }
                }
            }
            Ok(())
        })(),
    };
    rep.check("P X - r S X P = -i hbar E with no extra operator", out);

    for blk in derived {
        let out = blk.rules.iter().try_for_each(|rule| {
            let img = data.star(&rule.relation()).map_err(|e| e.to_string())?;
            let res = reduce(&img, std::slice::from_ref(blk));
            if res.is_zero() {
                Ok(())
            } else {
                Err(format!("({})* leaves {}", rule.lhs.render(nn), res.render(nn)))
            }
        });
        rep.check(format!("{} block is closed under the conjugation", blk.block), out);
    }
    rep
}

/// Structural checks of the real form: C' shape and limits.
pub fn real_form_checks(data: &RealFormData) -> VerificationReport {
    let mut rep = VerificationReport::new("real form");
    let c = &data.c_prime;
    let mid = c[1][1].equals(&Scalar::one()) && c[2][2].equals(&Scalar::one()) && c[1][2].is_zero() && c[2][1].is_zero();
    rep.check("C' middle block is the identity", if mid { Ok(()) } else { Err(format!("{} {} {} {}", c[1][1], c[1][2], c[2][1], c[2][2])) });
    let classical = (|| -> Result<(), String> {
        let at1 = |s: &Scalar| s.substitute(&|_| Some(Scalar::one())).map_err(|e| e.to_string());
        for a in 0..4 {
            for b in 0..4 {
                let want = match (a == b, a) {
                    (true, 3) => Scalar::from_int(-1),
                    (true, _) => Scalar::one(),
                    _ => Scalar::zero(),
                };
                let got = at1(&c[a][b])?;
                if !got.equals(&want) {
                    return Err(format!("C'({},{}) -> {}", a + 1, b + 1, got));
                }
            }
        }
        Ok(())
    })();
    rep.check("C' at r = q = 1 is diag(1, 1, 1, -1)", classical);
    let herm = (|| -> Result<(), String> {
        for a in 0..4 {
            for b in 0..4 {
                let cc = data.conj(&c[a][b]).map_err(|e| e.to_string())?;
                let real = cc.equals(&c[a][b]);
                let imag = cc.equals(&c[a][b].neg());
                if (a == b && !real) || (a != b && !c[a][b].is_zero() && !imag) {
                    return Err(format!("C'({},{}) = {}", a + 1, b + 1, c[a][b]));
                }
            }
        }
        Ok(())
    })();
    rep.check("C' diagonal real, off-diagonal imaginary", herm);
    rep
}

/// Gaussian-rational point with r = 1 and q = 1.
pub fn classical_point() -> Point {
    let one = Coeff::gauss(Gauss::new(Rat::from_integer(1.into()), Rat::from_integer(0.into())));
    Point::new().set_r_sqrt(one.clone()).set(Sym::Q(1, 2), one.clone()).set(Sym::Hbar, one)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> RealFormData {
        build_real_form(&ParameterContext::minkowski()).unwrap()
    }

    #[test]
    fn wrong_dimension_is_a_domain_error() {
        let ctx = ParameterContext::multi(6).with_real_form(true).unwrap();
        assert!(matches!(build_real_form(&ctx), Err(MinkowskiError::Domain(_))));
        assert!(matches!(build_real_form(&ParameterContext::multi(4)), Err(MinkowskiError::Domain(_))));
    }

    #[test]
    fn momenta_examples() {
        let d = data();
        let pa = momenta_action(&d).unwrap();
        let mih = Scalar::i().mul(&Scalar::hbar()).neg();
        assert!(pa[1][1].equals(&mih.mul(&Scalar::r(2))));
        assert!(pa[0][2].is_zero());
        let want = mih.mul(&Scalar::r(2)).mul(&Scalar::mu()).mul(&half());
        assert!(pa[0][0].equals(&want), "{}", pa[0][0]);
    }

    #[test]
    fn block_word_counts() {
        let n: Vec<(usize, usize)> = Block::all().iter().map(|b| (b.pivots().len(), b.normals().len())).collect();
        assert_eq!(n, vec![(6, 10), (16, 16), (10, 6), (16, 16), (6, 10)]);
        assert_eq!("dXdX".parse::<Block>().unwrap(), Block::DXdX);
        assert!("XY".parse::<Block>().is_err());
    }

    #[test]
    fn real_form_shape() {
        let rep = real_form_checks(&data());
        assert!(rep.all_passed(), "{}", rep);
    }
}
