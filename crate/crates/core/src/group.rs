//! Finite groups, orthogonal representations, 1-cocycles and the derivations,
//! bimodules and multiplier semigroups they define on the group algebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::algebra::FaithfulState;
use crate::bimodule::TomitaBimodule;
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::linalg::{lit, real, to_f64, CMat, CVec};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{gaussian, Rng};
use crate::wedderburn::Wedderburn;
use crate::Real;

/// Seed of the internal decomposition of group algebras.
const DECOMPOSITION_SEED: u64 = 0x6752_4f55_5031;

#[derive(Clone, Debug, PartialEq, Eq)]
enum GroupKind {
    Cyclic(usize),
    Symmetric(Vec<Vec<usize>>),
    Table,
}

/// A finite group given by its multiplication table, identity at index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    kind: GroupKind,
}

impl GroupSpec {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(Error::Config("multiplication table must be square and nonempty".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::Config("multiplication table entry out of range".into()));
        }
        for (g, row) in table.iter().enumerate() {
            if table[0][g] != g || row[0] != g {
                return Err(Error::Config("element 0 must be the identity".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Config(format!("not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for g in 0..n {
            match (0..n).find(|&h| table[g][h] == 0 && table[h][g] == 0) {
                Some(h) => inverse[g] = h,
                None => return Err(Error::Config(format!("element {g} has no inverse"))),
            }
        }
        Ok(Self {
            table,
            inverse,
            kind: GroupKind::Table,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("cyclic group order must be positive".into()));
        }
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let mut g = Self::from_table(table)?;
        g.kind = GroupKind::Cyclic(n);
        Ok(g)
    }

    /// Symmetric group on `k` letters, permutations in lexicographic order,
    /// product `(στ)(i) = σ(τ(i))`.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 || k > 5 {
            return Err(Error::Config("symmetric group supported for 1..=5 letters".into()));
        }
        let mut perms = vec![(0..k).collect::<Vec<usize>>()];
        loop {
            let mut p = perms.last().expect("nonempty").clone();
            // Next permutation in lexicographic order.
            let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
                break;
            };
            let j = (i + 1..k).rev().find(|&j| p[j] > p[i]).expect("successor exists");
            p.swap(i, j);
            p[i + 1..].reverse();
            perms.push(p);
        }
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index(&t.iter().map(|&i| s[i]).collect()))
                    .collect()
            })
            .collect();
        let mut g = Self::from_table(table)?;
        g.kind = GroupKind::Symmetric(perms);
        Ok(g)
    }

    /// Parses `cyclic:n` or `sym:k`.
    pub fn preset(name: &str) -> Result<Self> {
        let (kind, arg) = name
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("unknown group preset '{name}'")))?;
        let n: usize = arg
            .parse()
            .map_err(|_| Error::Config(format!("bad group order in '{name}'")))?;
        match kind {
            "cyclic" => Self::cyclic(n),
            "sym" => Self::symmetric(n),
            _ => Err(Error::Config(format!("unknown group preset '{name}'"))),
        }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// Left regular representation `λ(g)e_h = e_{gh}`.
    pub fn regular<T: Real>(&self, g: usize) -> CMat<T> {
        let n = self.order();
        let mut m = CMat::zeros(n, n);
        for h in 0..n {
            m[(self.mul(g, h), h)] = real(T::one());
        }
        m
    }
}

/// Real orthogonal representation `π: G → O(d)`.
#[derive(Clone, Debug)]
pub struct OrthogonalRep<T: Real> {
    mats: Vec<DMatrix<T>>,
}

impl<T: Real> OrthogonalRep<T> {
    pub fn new(group: &GroupSpec, mats: Vec<DMatrix<T>>) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::Config("representation needs one matrix per element".into()));
        }
        let d = mats[0].nrows();
        let tol: T = lit(1e-10);
        for m in &mats {
            if m.shape() != (d, d) {
                return Err(Error::Config(
                    "representation matrices must share a square shape".into(),
                ));
            }
            if (m.transpose() * m - DMatrix::identity(d, d)).norm() > tol {
                return Err(Error::Config("representation matrix is not orthogonal".into()));
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                if (&mats[g] * &mats[h] - &mats[group.mul(g, h)]).norm() > tol {
                    return Err(Error::Config(format!("not a homomorphism at ({g},{h})")));
                }
            }
        }
        Ok(Self { mats })
    }

    pub fn trivial(group: &GroupSpec, d: usize) -> Self {
        Self {
            mats: vec![DMatrix::identity(d, d); group.order()],
        }
    }

    /// One-dimensional sign character (even cyclic groups or symmetric groups).
    pub fn sign(group: &GroupSpec) -> Result<Self> {
        let signs: Vec<f64> = match &group.kind {
            GroupKind::Cyclic(n) if n % 2 == 0 => (0..*n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            GroupKind::Symmetric(perms) => perms.iter().map(|p| parity(p)).collect(),
            _ => {
                return Err(Error::Config(
                    "sign representation needs an even cyclic or symmetric group".into(),
                ))
            }
        };
        Self::new(
            group,
            signs.into_iter().map(|s| DMatrix::from_element(1, 1, lit(s))).collect(),
        )
    }

    /// Rotation by `2πk/n` on `ℝ²` for the cyclic group of order `n`.
    pub fn rotation(group: &GroupSpec) -> Result<Self> {
        let GroupKind::Cyclic(n) = group.kind else {
            return Err(Error::Config("rotation representation needs a cyclic group".into()));
        };
        let mats = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                DMatrix::from_row_slice(2, 2, &[lit(a.cos()), lit(-a.sin()), lit(a.sin()), lit(a.cos())])
            })
            .collect();
        Self::new(group, mats)
    }

    /// Standard `(k−1)`-dimensional representation of the symmetric group: the
    /// permutation action restricted to the sum-zero hyperplane.
    pub fn standard(group: &GroupSpec) -> Result<Self> {
        let GroupKind::Symmetric(perms) = &group.kind else {
            return Err(Error::Config("standard representation needs a symmetric group".into()));
        };
        let k = perms[0].len();
        if k < 2 {
            return Err(Error::Config(
                "standard representation needs at least two letters".into(),
            ));
        }
        // Orthonormal basis of the sum-zero hyperplane (Helmert vectors).
        let mut basis = DMatrix::<f64>::zeros(k, k - 1);
        for j in 1..k {
            let norm = ((j * (j + 1)) as f64).sqrt();
            for i in 0..j {
                basis[(i, j - 1)] = 1.0 / norm;
            }
            basis[(j, j - 1)] = -(j as f64) / norm;
        }
        let mats = perms
            .iter()
            .map(|p| {
                let mut perm = DMatrix::<f64>::zeros(k, k);
                for (i, &pi) in p.iter().enumerate() {
                    perm[(pi, i)] = 1.0;
                }
                let m = basis.transpose() * perm * &basis;
                m.map(lit)
            })
            .collect();
        Self::new(group, mats)
    }

    /// `trivial`, `sign`, `rotation` or `standard`.
    pub fn preset(group: &GroupSpec, name: &str) -> Result<Self> {
        match name {
            "trivial" => Ok(Self::trivial(group, 1)),
            "sign" => Self::sign(group),
            "rotation" => Self::rotation(group),
            "standard" => Self::standard(group),
            _ => Err(Error::Config(format!("unknown representation '{name}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn matrix(&self, g: usize) -> &DMatrix<T> {
        &self.mats[g]
    }
}

fn parity(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// 1-cocycle `b(gh) = b(g) + π(g) b(h)`.
#[derive(Clone, Debug)]
pub struct Cocycle<T: Real> {
    pub values: Vec<DVector<T>>,
}

impl<T: Real> Cocycle<T> {
    /// Coboundary `b(g) = π(g)v − v`.
    pub fn coboundary(rep: &OrthogonalRep<T>, v: &DVector<T>) -> Self {
        Self {
            values: rep.mats.iter().map(|m| m * v - v).collect(),
        }
    }

    /// `ψ(g) = ‖b(g)‖²`.
    pub fn psi(&self) -> Vec<T> {
        self.values.iter().map(|b| b.norm_squared()).collect()
    }
}

pub fn check_cocycle<T: Real>(
    group: &GroupSpec,
    rep: &OrthogonalRep<T>,
    b: &Cocycle<T>,
    tol: &Tolerances,
) -> CertificationReport {
    let mut rep_out = CertificationReport::new("cocycle", 0, tol);
    let n = group.order();
    let shape_ok = b.values.len() == n && b.values.iter().all(|v| v.len() == rep.dim());
    if !shape_ok {
        rep_out.record("cocycle_shape", 1.0, -1.0, false);
        return rep_out;
    }
    let mut worst = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            let r = &b.values[group.mul(g, h)] - &b.values[g] - rep.matrix(g) * &b.values[h];
            worst = worst.max(to_f64(r.norm()));
        }
    }
    rep_out.bound("cocycle_identity", worst, tol.check);
    rep_out
}

/// Random element of the cocycle space, drawn with Gaussian coefficients on an
/// orthonormal basis of the solution space of the cocycle equations.
pub fn sample_cocycle<T: Real>(group: &GroupSpec, rep: &OrthogonalRep<T>, rng: &mut Rng) -> Cocycle<T> {
    let n = group.order();
    let d = rep.dim();
    let mut system = DMatrix::<T>::zeros(n * n * d, n * d);
    for g in 0..n {
        for h in 0..n {
            let row = (g * n + h) * d;
            let gh = group.mul(g, h);
            for i in 0..d {
                system[(row + i, gh * d + i)] += T::one();
                system[(row + i, g * d + i)] -= T::one();
                for j in 0..d {
                    system[(row + i, h * d + j)] -= rep.matrix(g)[(i, j)];
                }
            }
        }
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let scale = to_f64(svd.singular_values.max()).max(1.0);
    let mut coeffs = DVector::<T>::zeros(n * d);
    for (j, s) in svd.singular_values.iter().enumerate() {
        if to_f64(*s) <= 1e-10 * scale {
            let g: T = gaussian(rng);
            coeffs += v_t.row(j).transpose() * g;
        }
    }
    Cocycle {
        values: (0..n).map(|g| coeffs.rows(g * d, d).into_owned()).collect(),
    }
}

/// Conditional negative definiteness of `ψ` and positive definiteness of
/// `e^{-tψ}` on the time grid.
pub fn cnd_check<T: Real>(group: &GroupSpec, psi: &[T], grid: &[f64], tol: &Tolerances) -> CertificationReport {
    let n = group.order();
    let mut rep = CertificationReport::new("cnd", 0, tol);
    let kernel = |f: &dyn Fn(T) -> T| CMat::<T>::from_fn(n, n, |i, j| real(f(psi[group.mul(group.inv(i), j)])));
    let sym = (0..n)
        .map(|g| to_f64((psi[g] - psi[group.inv(g)]).abs()))
        .fold(to_f64(psi[0].abs()), f64::max);
    rep.bound("symmetric_and_vanishing_at_identity", sym, tol.check);
    // Gram matrix compressed to vectors with zero sum.
    let k = kernel(&|x| x);
    let mut q = CMat::<T>::zeros(n, n.saturating_sub(1));
    for j in 1..n {
        let norm = ((j * (j + 1)) as f64).sqrt();
        for i in 0..j {
            q[(i, j - 1)] = real(lit(1.0 / norm));
        }
        q[(j, j - 1)] = real(lit(-(j as f64) / norm));
    }
    let top = if n > 1 {
        to_f64(crate::linalg::HermitianEigen::new(&(q.adjoint() * k * &q)).max())
    } else {
        0.0
    };
    rep.record("conditionally_negative", top.max(0.0), -top, top <= tol.check);
    let mut min_pd = f64::INFINITY;
    for &t in grid {
        let tt: T = lit(t);
        let e = crate::linalg::HermitianEigen::new(&kernel(&|x| (-(tt * x)).exp()));
        min_pd = min_pd.min(to_f64(e.min()));
    }
    rep.record(
        "exponential_positive_definite",
        (-min_pd).max(0.0),
        min_pd,
        min_pd >= -tol.check,
    );
    rep
}

/// Group von Neumann algebra with its trace, in block form.
#[derive(Clone, Debug)]
pub struct GroupAlgebra<T: Real> {
    group: GroupSpec,
    wedderburn: Wedderburn<T>,
    modular: ModularData<T>,
    /// Unitary from `ℓ²(G)` to GNS coordinates: `δ_g ↦ Λ(λ(g))`.
    fourier: CMat<T>,
    /// Columns: algebra coordinates of `λ(g)`.
    lambda: CMat<T>,
}

impl<T: Real> GroupAlgebra<T> {
    pub fn new(group: GroupSpec) -> Result<Self> {
        let n = group.order();
        let gens: Vec<CMat<T>> = (0..n).map(|g| group.regular(g)).collect();
        let w = Wedderburn::decompose(&gens, DECOMPOSITION_SEED)?;
        let rho_c = CMat::<T>::identity(n, n).scale(lit(1.0 / n as f64));
        let rho = w.block_density(&rho_c);
        let state = FaithfulState::new(w.algebra().clone(), rho)?;
        let a = w.algebra().clone();
        let s: T = lit(1.0 / (n as f64).sqrt());
        let mut fourier = CMat::zeros(a.dim(), n);
        let mut lambda = CMat::zeros(a.dim(), n);
        for (g, lg) in gens.iter().enumerate() {
            fourier.set_column(g, &w.gns_to_block(&lg.scale(s)));
            lambda.set_column(g, &a.coords(&w.to_block(lg)));
        }
        Ok(Self {
            group,
            wedderburn: w,
            modular: ModularData::new(state),
            fourier,
            lambda,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn modular(&self) -> &ModularData<T> {
        &self.modular
    }

    pub fn wedderburn(&self) -> &Wedderburn<T> {
        &self.wedderburn
    }

    pub fn fourier(&self) -> &CMat<T> {
        &self.fourier
    }

    pub fn lambda_coords(&self) -> &CMat<T> {
        &self.lambda
    }

    /// Group function of a GNS vector.
    pub fn to_function(&self, a: &CVec<T>) -> CVec<T> {
        self.fourier.adjoint() * a
    }
}

/// `ℓ²(G; ℂ^d)` with `(fξ)(g) = Σ_h f(h)π(h)ξ(h⁻¹g)`, `(ξf)(g) = Σ_h f(h⁻¹g)ξ(h)`,
/// `(𝒥ξ)(g) = −π(g) conj(ξ(g⁻¹))` and trivial flow.
pub fn group_bimodule<T: Real>(ga: &GroupAlgebra<T>, rep: &OrthogonalRep<T>) -> Result<TomitaBimodule<T>> {
    let g = ga.group();
    let n = g.order();
    let d = rep.dim();
    let m = n * d;
    let left_shift = |h: usize| {
        let mut l = CMat::<T>::zeros(m, m);
        for x in 0..n {
            let src = g.mul(g.inv(h), x);
            for i in 0..d {
                for j in 0..d {
                    l[(x * d + i, src * d + j)] = real(rep.matrix(h)[(i, j)]);
                }
            }
        }
        l
    };
    let right_shift = |k: usize| {
        let mut r = CMat::<T>::zeros(m, m);
        for x in 0..n {
            let src = g.mul(x, g.inv(k));
            for i in 0..d {
                r[(x * d + i, src * d + i)] = real(T::one());
            }
        }
        r
    };
    let lefts: Vec<CMat<T>> = (0..n).map(left_shift).collect();
    let rights: Vec<CMat<T>> = (0..n).map(right_shift).collect();
    let zero = Complex::new(T::zero(), T::zero());
    let sum = |mats: &[CMat<T>], f: &CVec<T>| {
        let mut out = CMat::zeros(m, m);
        for (k, mk) in mats.iter().enumerate() {
            if f[k] != zero {
                out += mk * f[k];
            }
        }
        out
    };
    let mut jmap = CMat::<T>::zeros(m, m);
    for x in 0..n {
        let xi = g.inv(x);
        for i in 0..d {
            for j in 0..d {
                jmap[(x * d + i, xi * d + j)] = real(-rep.matrix(x)[(i, j)]);
            }
        }
    }
    TomitaBimodule::from_tomita_actions(
        ga.modular().clone(),
        |a| sum(&lefts, &ga.to_function(a)),
        |b| sum(&rights, &ga.to_function(b)),
        jmap,
        CMat::identity(m, m),
        format!("group[{n}]⊗π{d}"),
    )
}

/// `δ(f)(g) = f(g) b(g)` into the group bimodule.
pub fn cocycle_derivation<T: Real>(
    ga: &GroupAlgebra<T>,
    rep: &OrthogonalRep<T>,
    b: &Cocycle<T>,
) -> Result<Derivation<T>> {
    let check = check_cocycle(ga.group(), rep, b, &Tolerances::default());
    if !check.passed() {
        let residual = check.checks.first().map_or(f64::NAN, |c| c.residual);
        return Err(Error::Precondition(format!(
            "values violate the cocycle identity (residual {residual:e})"
        )));
    }
    let target = group_bimodule(ga, rep)?;
    let n = ga.group().order();
    let d = rep.dim();
    let mut pointwise = CMat::<T>::zeros(n * d, n);
    for g in 0..n {
        for i in 0..d {
            pointwise[(g * d + i, g)] = real(b.values[g][i]);
        }
    }
    let matrix = pointwise * ga.fourier().adjoint();
    Derivation::new(target, matrix, "cocycle")
}

/// Multiplier semigroup `λ(g) ↦ e^{-tψ(g)} λ(g)` in algebra coordinates.
pub fn multiplier_semigroup<T: Real>(ga: &GroupAlgebra<T>, psi: &[T], t: T) -> Result<CMat<T>> {
    let lam = ga.lambda_coords();
    let inv = lam
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Structure("regular representation is not a basis".into()))?;
    let diag = CMat::from_diagonal(&CVec::from_iterator(
        psi.len(),
        psi.iter().map(|&p| real((-(t * p)).exp())),
    ));
    Ok(lam * diag * inv)
}

/// CSV rows `g,psi,exp(-t psi)`.
pub fn psi_csv<T: Real>(psi: &[T], t: f64) -> String {
    let mut out = String::from("g,psi,multiplier\n");
    for (g, &p) in psi.iter().enumerate() {
        let p = to_f64(p);
        out.push_str(&format!("{g},{p:.15e},{:.15e}\n", (-t * p).exp()));
    }
    out
}
