//! Shared strategies, oracles and property checks for the integration tests.
//!
//! The oracles here deliberately avoid the crate's own linear algebra and
//! dimension formulas so that agreement is evidence rather than tautology.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use parabolic_claws::claws::{
    characteristic, cross_validate_ma, find_conservation_laws, table_for, verify, AnsatzSpec, ConservationLaw,
};
use parabolic_claws::cli::ProblemFile;
use parabolic_claws::expr::{Expr, Monomial, Poly, Rational, Symbol};
use parabolic_claws::jets::{
    euler_operator, invert_divergence, total_derivative, FluxBounds, MultiIndex, ReplacementTable,
};
use parabolic_claws::parabolic::{
    is_minor_affine, ma_classify, ma_traceless_residue, quartic_form, symbol_form, EvolutionEquation, ResidueMode,
};

pub type Check = Result<(), TestCaseError>;

// ---------------------------------------------------------------- symbols

pub fn jet(n: usize, dirs: &[usize]) -> Expr {
    Expr::symbol(Symbol::jet(n, dirs, 0))
}

pub fn x(i: usize) -> Expr {
    Expr::symbol(Symbol::x(i))
}

pub fn t() -> Expr {
    Expr::symbol(Symbol::t())
}

pub fn int(k: i64) -> Expr {
    Expr::int(k)
}

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

/// Spatial jets of order `<= order`.
pub fn jets_up_to(n: usize, order: u32) -> Vec<Symbol> {
    MultiIndex::spatial_up_to(n, order)
        .into_iter()
        .map(Symbol::Jet)
        .collect()
}

pub fn with_base(n: usize, mut syms: Vec<Symbol>, time: bool) -> Vec<Symbol> {
    syms.extend((1..=n).map(Symbol::x));
    if time {
        syms.push(Symbol::t());
    }
    syms
}

// ---------------------------------------------------------------- strategies

/// Random polynomial with small integer coefficients in `symbols`.
pub fn poly_in(symbols: Vec<Symbol>, max_terms: usize, max_exp: u32) -> impl Strategy<Value = Expr> {
    let k = symbols.len();
    prop::collection::vec((-4i64..=4, prop::collection::vec(0..=max_exp, k)), 0..=max_terms).prop_map(move |terms| {
        let mut p = Poly::zero();
        for (c, exps) in terms {
            let m = Monomial::from_factors(
                symbols
                    .iter()
                    .cloned()
                    .zip(exps)
                    .filter(|(_, e)| *e > 0)
                    .collect::<Vec<_>>(),
            );
            p.add_term(m, Rational::from_integer(c.into()));
        }
        Expr::from_poly(p)
    })
}

/// Random rational function whose denominator is a nonzero polynomial.
pub fn rational_in(symbols: Vec<Symbol>) -> impl Strategy<Value = Expr> {
    (poly_in(symbols.clone(), 3, 2), poly_in(symbols, 2, 1), 1i64..=3).prop_map(|(a, b, k)| {
        let den = &b + &int(k);
        if den.is_zero() {
            a
        } else {
            a.try_div(&den).unwrap()
        }
    })
}

// ---------------------------------------------------------------- exact oracles

/// Rank of a dense rational matrix by plain elimination.
pub fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Null-space basis of a dense rational matrix.
pub fn kernel(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Rational::one() / &a[r][c];
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = &f * &a[r][j];
                    a[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            v
        })
        .collect()
}

/// Coefficient vectors of `exprs` over the union of their monomials.
pub fn coefficient_matrix(exprs: &[Expr]) -> Vec<Vec<Rational>> {
    let monomials: BTreeSet<Monomial> = exprs
        .iter()
        .flat_map(|e| {
            assert!(e.is_polynomial());
            e.numerator().terms().map(|(m, _)| m.clone()).collect::<Vec<_>>()
        })
        .collect();
    exprs
        .iter()
        .map(|e| monomials.iter().map(|m| e.numerator().coefficient(m)).collect())
        .collect()
}

/// `span(a) == span(b)` for polynomial expressions.
pub fn same_span(a: &[Expr], b: &[Expr]) -> bool {
    let both: Vec<Expr> = a.iter().chain(b).cloned().collect();
    let ra = rank(coefficient_matrix(a));
    ra == rank(coefficient_matrix(b)) && ra == rank(coefficient_matrix(&both))
}

/// `target` lies in the span of `basis`.
pub fn in_span(basis: &[Expr], target: &Expr) -> bool {
    let mut both = basis.to_vec();
    both.push(target.clone());
    rank(coefficient_matrix(basis)) == rank(coefficient_matrix(&both))
}

/// All polynomials `f(x, t)` of total degree `<= d` with `f_t + f_xx = 0`,
/// solved coefficient by coefficient.
pub fn backward_heat_polynomials(d: u32) -> Vec<Expr> {
    let monos: Vec<(u32, u32)> = (0..=d).flat_map(|k| (0..=k).map(move |b| (k - b, b))).collect();
    let index: BTreeMap<(u32, u32), usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    // coefficient of x^p t^q in f_t + f_xx
    let mut rows = Vec::new();
    for p in 0..=d {
        for qd in 0..=d {
            let mut row = vec![Rational::zero(); monos.len()];
            if let Some(&i) = index.get(&(p, qd + 1)) {
                row[i] += Rational::from_integer((qd + 1).into());
            }
            if let Some(&i) = index.get(&(p + 2, qd)) {
                row[i] += Rational::from_integer(((p + 2) * (p + 1)).into());
            }
            if row.iter().any(|v| !v.is_zero()) {
                rows.push(row);
            }
        }
    }
    kernel(&rows, monos.len())
        .into_iter()
        .map(|v| {
            monos
                .iter()
                .zip(v)
                .map(|((p, qd), c)| {
                    &Expr::constant(c) * &(&x(1).pow(*p as i32).unwrap() * &t().pow(*qd as i32).unwrap())
                })
                .sum()
        })
        .collect()
}

/// Nullity of the spatial trace `Sym^{r+2}(R^{n+1}) -> Sym^r(R^{n+1})`,
/// realized on polynomials as the spatial Laplacian in variables
/// `y0` (time) and `y1..yn`.
pub fn trace_kernel_dimension(n: usize, r: usize) -> usize {
    fn exponents(vars: usize, degree: usize) -> Vec<Vec<usize>> {
        if vars == 1 {
            return vec![vec![degree]];
        }
        (0..=degree)
            .flat_map(|k| {
                exponents(vars - 1, degree - k).into_iter().map(move |mut rest| {
                    rest.insert(0, k);
                    rest
                })
            })
            .collect()
    }
    let source = exponents(n + 1, r + 2);
    let target = exponents(n + 1, r);
    let pos: BTreeMap<Vec<usize>, usize> = target.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    // columns = source monomials, rows = target monomials
    let mut m = vec![vec![Rational::zero(); source.len()]; target.len()];
    for (c, e) in source.iter().enumerate() {
        for i in 1..=n {
            if e[i] >= 2 {
                let mut img = e.clone();
                img[i] -= 2;
                m[pos[&img]][c] += Rational::from_integer((e[i] * (e[i] - 1)).into());
            }
        }
    }
    source.len() - rank(m)
}

/// `dim J^2(R^{n+1}, R)`: base, value, first and second derivatives.
pub fn second_jet_space_dimension(n: usize) -> u64 {
    let m = (n + 1) as u64;
    m + 1 + m + m * (m + 1) / 2
}

pub fn inverse2(g: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let det = &g[0][0] * &g[1][1] - &g[0][1] * &g[1][0];
    if det.is_zero() {
        return None;
    }
    Some(vec![
        vec![&g[1][1] / &det, -&g[0][1] / &det],
        vec![-&g[1][0] / &det, &g[0][0] / &det],
    ])
}

// ---------------------------------------------------------------- corpus

pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub jet_degree: u32,
    pub base_degree: u32,
}

/// Equations that are parabolic at their reference jet, with search bounds
/// small enough for the test suites.
pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "heat",
        source: "n=1; u_t = u_xx",
        jet_degree: 2,
        base_degree: 2,
    },
    CorpusEntry {
        name: "burgers",
        source: "n=1; u_t = u_xx + u*u_x",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "potential burgers",
        source: "n=1; u_t = u_xx + u_x^2",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "porous medium",
        source: "n=1; u_t = u*u_xx + u_x^2; ref u = 1",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "cubic flux",
        source: "n=1; u_t = u_xx + u_x^2*u_xx",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "advection-diffusion",
        source: "n=1; u_t = u_xx + 3*u_x",
        jet_degree: 1,
        base_degree: 2,
    },
    CorpusEntry {
        name: "reaction",
        source: "n=1; u_t = u_xx + u^2",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "non-MA n=1",
        source: "n=1; u_t = u_xx + u_xx^2",
        jet_degree: 2,
        base_degree: 1,
    },
    CorpusEntry {
        name: "heat n=2",
        source: "n=2; u_t = u_11 + u_22",
        jet_degree: 1,
        base_degree: 2,
    },
    CorpusEntry {
        name: "det Hess",
        source: "n=2; u_t = u_11*u_22 - u_12^2; ref u_11 = 1; ref u_22 = 1",
        jet_degree: 2,
        base_degree: 0,
    },
    CorpusEntry {
        name: "heat + det Hess",
        source: "n=2; u_t = u_11 + u_22 + u_11*u_22 - u_12^2",
        jet_degree: 2,
        base_degree: 0,
    },
    CorpusEntry {
        name: "heat + (heat)^2",
        source: "n=2; u_t = u_11 + u_22 + (u_11 + u_22)^2",
        jet_degree: 2,
        base_degree: 0,
    },
    CorpusEntry {
        name: "heat + u_11^2",
        source: "n=2; u_t = u_11 + u_22 + u_11^2",
        jet_degree: 2,
        base_degree: 0,
    },
    CorpusEntry {
        name: "anisotropic",
        source: "n=2; u_t = 2*u_11 + u_12 + u_22 + u_1*u_2",
        jet_degree: 2,
        base_degree: 0,
    },
];

pub fn corpus_equation(entry: &CorpusEntry) -> (ProblemFile, EvolutionEquation) {
    let file = ProblemFile::parse(entry.source).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
    let eq = file.equation().unwrap();
    (file, eq)
}

pub fn corpus_laws(entry: &CorpusEntry) -> (EvolutionEquation, Vec<ConservationLaw>) {
    let (_, eq) = corpus_equation(entry);
    let spec = AnsatzSpec::new(2, entry.jet_degree, entry.base_degree);
    let found = find_conservation_laws(&eq, &spec, false).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
    (eq, found.laws)
}

// ---------------------------------------------------------------- property checks

pub fn check_total_derivatives_commute(n: usize, e: &Expr, a: usize, b: usize) -> Check {
    let ab = total_derivative(&total_derivative(e, a), b);
    let ba = total_derivative(&total_derivative(e, b), a);
    prop_assert_eq!(ab, ba, "n={} a={} b={} e={}", n, a, b, e);
    Ok(())
}

fn divergence(flux: &[Expr]) -> Expr {
    flux.iter().enumerate().map(|(i, x)| total_derivative(x, i + 1)).sum()
}

pub fn check_euler_kills_divergence(flux: &[Expr]) -> Check {
    let r = divergence(flux);
    let e = euler_operator(&r).unwrap();
    prop_assert!(e.is_zero(), "E(div X) = {} for X = {:?}", e, flux);
    Ok(())
}

pub fn check_inversion_round_trip(n: usize, flux: &[Expr]) -> Check {
    let r = divergence(flux);
    let found = invert_divergence(&r, n, &FluxBounds::for_residual(&r))
        .map_err(|e| TestCaseError::fail(format!("{e} for residual {r}")))?;
    prop_assert_eq!(found.len(), n);
    prop_assert_eq!(divergence(&found), r);
    Ok(())
}

/// Every found law verifies exactly and has a nonzero characteristic.
pub fn check_solver_soundness(eq: &EvolutionEquation, spec: &AnsatzSpec) -> Check {
    let found = find_conservation_laws(eq, spec, true).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let table = table_for(eq).unwrap();
    for law in &found.laws {
        let flux = law
            .flux
            .as_ref()
            .ok_or_else(|| TestCaseError::fail(format!("no flux for {}", law.density)))?;
        prop_assert!(
            verify(&table, &law.density, flux).unwrap(),
            "law {} failed",
            law.density
        );
        prop_assert!(!table.reduce(&law.characteristic).unwrap().is_zero());
        prop_assert_eq!(&characteristic(&law.density).unwrap(), &law.characteristic);
    }
    Ok(())
}

pub fn check_cross_validation(eq: &EvolutionEquation, spec: &AnsatzSpec) -> Check {
    let found = find_conservation_laws(eq, spec, true).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let check = cross_validate_ma(eq, &found.laws);
    prop_assert!(check.is_consistent(), "{:?} for {}", check.violations, eq.rhs());
    Ok(())
}

/// `T = D_x S` has zero characteristic.
pub fn check_trivial_density(s: &Expr) -> Check {
    let density = total_derivative(s, 1);
    let q = characteristic(&density).unwrap();
    prop_assert!(q.is_zero(), "E(D_x S) = {} for S = {}", q, s);
    let law = ConservationLaw {
        density,
        flux: None,
        characteristic: q,
    };
    prop_assert!(law.is_trivial());
    Ok(())
}

/// Each cached entry extends to its neighbours by total differentiation.
pub fn check_table_consistency(n: usize, rhs: &Expr, requests: &[MultiIndex], max_order: u32) -> Check {
    let table = ReplacementTable::new(n, rhs.clone(), max_order).unwrap();
    for idx in requests.iter().filter(|i| i.order() <= max_order) {
        table.entry(idx).unwrap();
    }
    let fresh = ReplacementTable::new(n, rhs.clone(), max_order).unwrap();
    // extensions by time need entries one order deeper than the table answers
    let deep = ReplacementTable::new(n, rhs.clone(), max_order + 2).unwrap();
    for (idx, value) in table.cached() {
        if idx.order() > max_order {
            continue;
        }
        prop_assert_eq!(&fresh.entry(&idx).unwrap(), &value, "order-dependent entry {:?}", idx);
        if idx.order() == max_order {
            continue;
        }
        for a in 0..=n {
            let next = idx.with_direction(a);
            let expected = deep.reduce(&total_derivative(&value, a)).unwrap();
            prop_assert_eq!(table.entry(&next).unwrap(), expected, "extension of {:?} by {}", idx, a);
        }
    }
    Ok(())
}

/// The quartic equals the Hessian of `G` in unordered second-jet coordinates
/// contracted with `xi_i xi_j`.
pub fn check_quartic_basis(n: usize, rhs: &Expr) -> Check {
    let eq = EvolutionEquation::new(n, rhs.clone()).unwrap();
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
    let xi = |i: usize| Expr::symbol(Symbol::xi(i));
    let mut expected = Expr::zero();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            let d = rhs.diff(&Symbol::jet(n, &[i, j], 0)).diff(&Symbol::jet(n, &[k, l], 0));
            expected = &expected + &(&d * &(&(&xi(i) * &xi(j)) * &(&xi(k) * &xi(l))));
        }
    }
    prop_assert_eq!(quartic_form(&eq), expected);
    Ok(())
}

/// Minor-affinity is unchanged by a constant congruence of the Hessian.
pub fn check_congruence_invariance(rhs: &Expr, a: [[i64; 2]; 2]) -> Check {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    prop_assume!(det != 0);
    let h = |i: usize, j: usize| jet(2, &[i + 1, j + 1]);
    let mut bindings = BTreeMap::new();
    for i in 0..2 {
        for j in i..2 {
            let mut acc = Expr::zero();
            for k in 0..2 {
                for l in 0..2 {
                    acc = &acc + &(&int(a[k][i] * a[l][j]) * &h(k, l));
                }
            }
            bindings.insert(Symbol::jet(2, &[i + 1, j + 1], 0), acc);
        }
    }
    let moved = rhs.substitute(&bindings).unwrap();
    let before = is_minor_affine(&EvolutionEquation::new(2, rhs.clone()).unwrap());
    let after = is_minor_affine(&EvolutionEquation::new(2, moved).unwrap());
    prop_assert_eq!(before, after, "G = {}", rhs);
    Ok(())
}

/// `q = q0 + sigma h` and `q0` is trace-free for the inverse symbol at the reference.
pub fn check_residue_decomposition(rhs: &Expr, reference: &[(Symbol, Rational)]) -> Check {
    let eq = EvolutionEquation::with_reference(2, rhs.clone(), reference.to_vec()).unwrap();
    let g = symbol_form(&eq).evaluate(eq.reference_jet()).unwrap();
    let Some(ginv) = inverse2(&g) else {
        prop_assume!(false);
        unreachable!()
    };
    let res = ma_traceless_residue(&eq, ResidueMode::AtReference).unwrap();
    prop_assert!((&(&res.quartic - &res.residue) - &(&res.sigma * &res.cofactor)).is_zero());
    let mut tr = Expr::zero();
    for i in 0..2 {
        for j in 0..2 {
            let d = res.residue.diff(&Symbol::xi(i + 1)).diff(&Symbol::xi(j + 1));
            tr = &tr + &(&Expr::constant(ginv[i][j].clone()) * &d);
        }
    }
    prop_assert!(tr.is_zero(), "trace {} of residue {}", tr, res.residue);
    let report = ma_classify(&eq, ResidueMode::AtReference);
    if report.minor_affine {
        prop_assert_eq!(report.residue_vanishes, Some(true));
    }
    Ok(())
}

pub fn check_parse_print(file: &ProblemFile) -> Check {
    let printed = file.print();
    let back = ProblemFile::parse(&printed).map_err(|e| TestCaseError::fail(format!("{e}: {printed}")))?;
    prop_assert_eq!(&back, file, "{}", printed);
    Ok(())
}

// ---------------------------------------------------------------- random equations

/// `a u_xx + P(u, u_x)` with `a > 0`, optionally with a `u_xx^2` term.
pub fn random_n1_equation(with_quadratic_hessian: bool) -> impl Strategy<Value = EvolutionEquation> {
    (
        1i64..=3,
        poly_in(jets_up_to(1, 1), 3, 2),
        if with_quadratic_hessian { -2i64..=2 } else { 0i64..=0 },
    )
        .prop_map(|(a, p, b)| {
            let uxx = jet(1, &[1, 1]);
            let rhs = &(&(&int(a) * &uxx) + &p) + &(&int(b) * &(&uxx * &uxx));
            EvolutionEquation::new(1, rhs).unwrap()
        })
}

/// Constant-coefficient quadratic in the `n = 2` Hessian plus the Laplacian.
pub fn random_hessian_quadratic() -> impl Strategy<Value = Expr> {
    let hess = vec![
        Symbol::jet(2, &[1, 1], 0),
        Symbol::jet(2, &[1, 2], 0),
        Symbol::jet(2, &[2, 2], 0),
    ];
    poly_in(hess, 4, 2).prop_map(|p| &(&jet(2, &[1, 1]) + &jet(2, &[2, 2])) + &p)
}

/// Random combination of the Hessian minors in three variables with constant
/// coefficients.
pub fn random_minor_combination() -> impl Strategy<Value = Expr> {
    prop::collection::vec(-3i64..=3, 13).prop_map(|c| {
        let h = |i: usize, j: usize| jet(3, &[i, j]);
        let minor =
            |r: [usize; 2], s: [usize; 2]| &(&h(r[0], s[0]) * &h(r[1], s[1])) - &(&h(r[0], s[1]) * &h(r[1], s[0]));
        let det3 = [
            (1, 2, 3, 1),
            (1, 3, 2, -1),
            (2, 1, 3, -1),
            (2, 3, 1, 1),
            (3, 1, 2, 1),
            (3, 2, 1, -1),
        ]
        .into_iter()
        .map(|(a, b, cc, s)| &int(s) * &(&(&h(1, a) * &h(2, b)) * &h(3, cc)))
        .sum::<Expr>();
        let mut terms = vec![int(1), h(1, 1), h(1, 2), h(1, 3), h(2, 2), h(2, 3), h(3, 3)];
        terms.extend([
            minor([1, 2], [1, 2]),
            minor([1, 2], [1, 3]),
            minor([1, 3], [2, 3]),
            minor([2, 3], [2, 3]),
            minor([1, 3], [1, 3]),
        ]);
        terms.push(det3);
        terms.iter().zip(&c).map(|(m, k)| &int(*k) * m).sum()
    })
}

/// Random problem file with a rational right-hand side.
pub fn random_problem_file() -> impl Strategy<Value = ProblemFile> {
    (1usize..=3)
        .prop_flat_map(|n| {
            let syms = with_base(n, jets_up_to(n, 2), true);
            (
                Just(n),
                rational_in(syms),
                prop::collection::vec((0usize..3, -5i64..=5, 1i64..=4), 0..3),
                prop::option::of(0u32..4),
                prop::option::of(0u32..4),
                prop::option::of(0u32..3),
            )
        })
        .prop_map(|(n, rhs, refs, jd, bd, ord)| {
            let mut file = ProblemFile::new(n, rhs);
            let candidates = jets_up_to(n, 2);
            for (k, p, d) in refs {
                file.reference.insert(candidates[k % candidates.len()].clone(), q(p, d));
            }
            file.jet_degree = jd;
            file.base_degree = bd;
            file.order = ord;
            file
        })
}
