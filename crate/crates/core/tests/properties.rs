use bayeslens::laws::Sampler;
use bayeslens::markov::graph_state;
use bayeslens::support::SupportCategory;
use bayeslens::*;
use nalgebra::DMatrix;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: u32, d: u32) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Integer weights normalised per row; an all-zero row becomes a point mass.
fn normalise(weights: &[Vec<u32>]) -> Vec<Vec<Rational>> {
    weights
        .iter()
        .map(|w| {
            let total: u32 = w.iter().sum();
            if total == 0 {
                (0..w.len()).map(|j| if j == 0 { Rational::one() } else { Rational::zero() }).collect()
            } else {
                w.iter().map(|&v| q(v, total)).collect()
            }
        })
        .collect()
}

fn weights(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::vec(0u32..4, cols), rows)
}

fn exact(dom: usize, cod: usize, w: &[Vec<u32>]) -> StochMapExact {
    let (x, y) = (FinObject::indexed(dom).unwrap(), FinObject::indexed(cod).unwrap());
    StochMap::from_rows(x, y, normalise(w)).unwrap()
}

fn exact_state(n: usize, w: &[u32]) -> StochMapExact {
    let probs = normalise(&[w.to_vec()]).remove(0);
    StochMap::state(FinObject::indexed(n).unwrap(), probs).unwrap()
}

fn float(m: &StochMapExact) -> StochMap64 {
    m.map_scalar(|v| num_traits::ToPrimitive::to_f64(v).unwrap())
}

/// A state and a map out of its object.
fn finite_case() -> impl Strategy<Value = (StochMapExact, StochMapExact)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
        (prop::collection::vec(0u32..4, n), weights(n, m))
            .prop_map(move |(p, f)| (exact_state(n, &p), exact(n, m, &f)))
    })
}

/// Rows of `f` replaced by rows of `g` wherever `mask` is set.
fn splice(f: &StochMapExact, g: &StochMapExact, mask: &[bool]) -> StochMapExact {
    let rows = f
        .rows()
        .into_iter()
        .zip(g.rows())
        .zip(mask)
        .map(|((a, b), &m)| if m { b } else { a })
        .collect();
    StochMap::from_rows(f.dom().clone(), f.cod().clone(), rows).unwrap()
}

fn agree_on_support(f: &StochMapExact, g: &StochMapExact, pi: &StochMapExact) -> bool {
    (0..pi.n_cols()).all(|x| pi.probs()[x].is_zero() || f.row(x) == g.row(x))
}

fn gauss_map(dom: usize, cod: usize, seed: u64, rank_drop: bool) -> GaussMap64 {
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
    let a = normal(cod, dom);
    let b = normal(cod, 1).column(0).into_owned();
    let mut factor = normal(cod, cod);
    if rank_drop {
        let keep = rng.random_range(0..=cod);
        factor = factor.columns(0, keep).into_owned();
    }
    GaussMap::from_factor(GaussObject::new(dom), GaussObject::new(cod), a, b, factor).unwrap()
}

fn gauss_state(n: usize, seed: u64, rank_drop: bool) -> GaussMap64 {
    gauss_map(0, n, seed, rank_drop)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn comonoid_laws_hold_exactly(n in 1usize..=4, d in 1usize..=4) {
        let x = FinObject::indexed(n).unwrap();
        let id = StochMapExact::identity(&x);
        let copy = StochMapExact::copy(&x);
        let del = StochMapExact::delete(&x);
        prop_assert_eq!(copy.compose(&copy.tensor(&id)).unwrap(), copy.compose(&id.tensor(&copy)).unwrap());
        prop_assert_eq!(copy.compose(&del.tensor(&id)).unwrap(), id.clone());
        prop_assert_eq!(copy.compose(&id.tensor(&del)).unwrap(), id.clone());
        prop_assert_eq!(copy.compose(&StochMap::swap(&x, &x)).unwrap(), copy.clone());

        let r = GaussObject::new(d);
        let id = GaussMap64::identity(&r);
        let copy = GaussMap64::copy(&r);
        let del = GaussMap64::delete(&r);
        let dist = |a: &GaussMap64, b: &GaussMap64| Gauss64::distance(a, b).unwrap();
        prop_assert_eq!(dist(&copy.compose(&copy.tensor(&id)).unwrap(), &copy.compose(&id.tensor(&copy)).unwrap()), 0.0);
        prop_assert_eq!(dist(&copy.compose(&del.tensor(&id)).unwrap(), &id), 0.0);
        prop_assert_eq!(dist(&copy.compose(&id.tensor(&del)).unwrap(), &id), 0.0);
        prop_assert_eq!(dist(&copy.compose(&GaussMap::swap(&r, &r)).unwrap(), &copy), 0.0);
    }

    #[test]
    fn delete_is_natural((_, f) in finite_case(), seed in any::<u64>(), n in 1usize..=4, m in 0usize..=4) {
        prop_assert_eq!(f.compose(&StochMap::delete(f.cod())).unwrap(), StochMap::delete(f.dom()));
        let g = gauss_map(n, m, seed, true);
        let lhs = g.compose(&GaussMap::delete(g.cod())).unwrap();
        prop_assert_eq!(Gauss64::distance(&lhs, &GaussMap::delete(g.dom())).unwrap(), 0.0);
    }

    #[test]
    fn as_equal_matches_the_row_oracle(
        (pi, f) in finite_case(),
        seeds in prop::collection::vec((any::<u64>(), prop::collection::vec(any::<bool>(), 4)), 2),
    ) {
        let n = f.n_rows();
        let other = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            float_to_exact(&FinStoch64::random_morphism(&mut rng, f.dom(), f.cod(), 0.3))
        };
        let g = splice(&f, &other(seeds[0].0), &seeds[0].1[..n]);
        let h = splice(&f, &other(seeds[1].0), &seeds[1].1[..n]);
        let zero = Rational::zero();
        let eq = |a: &StochMapExact, b: &StochMapExact| as_equal::<FinStochExact>(a, b, &pi, &zero).unwrap();
        for (a, b) in [(&f, &g), (&f, &h), (&g, &h)] {
            prop_assert_eq!(eq(a, b), agree_on_support(a, b, &pi));
            prop_assert_eq!(eq(a, b), eq(b, a));
        }
        prop_assert!(eq(&f, &f) && eq(&g, &g));
        if eq(&f, &g) && eq(&g, &h) {
            prop_assert!(eq(&f, &h));
        }
    }

    #[test]
    fn base_change_along_precomposition(
        (pi, f) in finite_case(),
        k in 1usize..=4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = float_to_exact(&FinStoch64::random_morphism(&mut rng, f.cod(), &FinObject::indexed(k).unwrap(), 0.3));
        let noise = float_to_exact(&FinStoch64::random_morphism(&mut rng, f.cod(), u.cod(), 0.0));
        let pushed = pi.compose(&f).unwrap();
        let off: Vec<bool> = pushed.probs().iter().map(|p| p.is_zero()).collect();
        let v = splice(&u, &noise, &off);
        let zero = Rational::zero();
        prop_assert!(as_equal::<FinStochExact>(&u, &v, &pushed, &zero).unwrap());
        prop_assert!(as_equal::<FinStochExact>(&f.compose(&u).unwrap(), &f.compose(&v).unwrap(), &pi, &zero).unwrap());
    }

    #[test]
    fn stochasticity_survives_long_chains(
        dims in prop::collection::vec(1usize..=6, 2..=21),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let objects: Vec<FinObject> = dims.iter().map(|&d| FinObject::indexed(d).unwrap()).collect();
        let maps: Vec<StochMap64> = objects
            .windows(2)
            .map(|w| FinStoch64::random_morphism(&mut rng, &w[0], &w[1], 0.3))
            .collect();
        let chain = maps.iter().skip(1).try_fold(maps[0].clone(), |acc, g| acc.compose(g)).unwrap();
        let paired = chain.tensor(&maps[maps.len() - 1]);
        for m in [&chain, &paired] {
            for row in m.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn marginals_commute_with_tensors(
        (a, b) in (1usize..=3, 1usize..=3),
        (c, d) in (1usize..=3, 1usize..=3),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obj = |n| FinObject::indexed(n).unwrap();
        let (x, y, x2, y2) = (obj(a), obj(b), obj(c), obj(d));
        let pi = float_to_exact(&FinStoch64::random_state(&mut rng, &x.tensor(&y), 0.3));
        let f = float_to_exact(&FinStoch64::random_morphism(&mut rng, &x, &x2, 0.3));
        let g = float_to_exact(&FinStoch64::random_morphism(&mut rng, &y, &y2, 0.3));
        let (l, r) = marginals::<FinStochExact>(&pi, &x, &y).unwrap();
        let (l2, r2) = marginals::<FinStochExact>(&pi.compose(&f.tensor(&g)).unwrap(), &x2, &y2).unwrap();
        prop_assert_eq!(l2, l.compose(&f).unwrap());
        prop_assert_eq!(r2, r.compose(&g).unwrap());
    }

    #[test]
    fn finite_inversion_laws((pi, f) in finite_case(), seed in any::<u64>()) {
        let (pi, f) = (float(&pi), float(&f));
        let tol = 1e-12;
        let ctx = InversionContext::<FinStoch64>::new(&f, &pi, &tol).unwrap();
        let pushed = ctx.pushforward_state().clone();
        let joint = |h: &StochMap64| {
            let back = graph_state::<FinStoch64>(&pushed, h).unwrap();
            let swapped = back.compose(&StochMap::swap(f.cod(), f.dom())).unwrap();
            FinStoch64::distance(&graph_state::<FinStoch64>(&pi, &f).unwrap(), &swapped).unwrap()
        };
        let h1 = ctx.ordinary_inverse(&tol).unwrap();
        prop_assert!(joint(&h1) <= 1e-9);

        // Another ordinary inverse: arbitrary rows where the pushforward vanishes.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = FinStoch64::random_morphism(&mut rng, f.cod(), f.dom(), 0.0);
        let h2 = (0..pushed.n_cols())
            .filter(|&y| pushed.probs()[y] <= tol)
            .fold(h1.clone(), |h, y| h.with_row(y, noise.row(y)).unwrap());
        prop_assert!(joint(&h2) <= 1e-9);
        let (s1, s2) = (ctx.to_supported(&h1).unwrap(), ctx.to_supported(&h2).unwrap());
        prop_assert!(FinStoch64::distance(&s1, &s2).unwrap() <= 1e-9);

        let sharp = ctx.supported_inverse(&tol).unwrap();
        let psi = ctx.to_ordinary(&sharp).unwrap();
        prop_assert!(joint(&psi) <= 1e-9);
        prop_assert_eq!(ctx.to_supported(&psi).unwrap(), sharp);
        let round = ctx.to_ordinary(&ctx.to_supported(&h2).unwrap()).unwrap();
        prop_assert!(as_equal_residual::<FinStoch64>(&round, &h2, &pushed).unwrap() <= 1e-9);
    }

    #[test]
    fn gaussian_bayes_joint(n in 1usize..=4, m in 0usize..=4, seeds in (any::<u64>(), any::<u64>()), drops in (any::<bool>(), any::<bool>())) {
        let pi = gauss_state(n, seeds.0, drops.0);
        let f = gauss_map(n, m, seeds.1, drops.1);
        let dagger = f.invert(&pi, 1e-12).unwrap();
        let pushed = pi.compose(&f).unwrap();
        let lhs = graph_state::<Gauss64>(&pi, &f).unwrap();
        let rhs = graph_state::<Gauss64>(&pushed, &dagger)
            .unwrap()
            .compose(&GaussMap::swap(f.cod(), f.dom()))
            .unwrap();
        prop_assert!(Gauss64::distance(&lhs, &rhs).unwrap() <= 1e-8);
    }

    #[test]
    fn gaussian_representability(n in 1usize..=4, m in 1usize..=4, seeds in (any::<u64>(), any::<u64>(), any::<u64>())) {
        let pi = gauss_state(n, seeds.0, true);
        let f = gauss_map(n, m, seeds.1, true);
        let s = Gauss64::support(&pi, &1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seeds.2);
        let g = Gauss64::perturb_off_support(&mut rng, &f, &s);
        let restricted = |h: &GaussMap64| s.section.compose(h).unwrap();
        prop_assert!(as_equal::<Gauss64>(&f, &g, &pi, &1e-8).unwrap());
        prop_assert!(Gauss64::distance(&restricted(&f), &restricted(&g)).unwrap() <= 1e-8);

        let shifted = f.with_affine_part(f.a().clone(), f.b().add_scalar(1.0)).unwrap();
        prop_assert!(!as_equal::<Gauss64>(&f, &shifted, &pi, &1e-8).unwrap());
        prop_assert!(Gauss64::distance(&restricted(&f), &restricted(&shifted)).unwrap() > 1e-8);

        let ir = s.section.compose(&s.retraction).unwrap();
        prop_assert!(Gauss64::distance(&ir, &GaussMap::identity(&s.carrier)).unwrap() <= 1e-10);
    }
}

/// Rationalise a float map whose entries are dyadic, preserving row sums.
fn float_to_exact(m: &StochMap64) -> StochMapExact {
    let rows = m
        .rows()
        .into_iter()
        .map(|row| {
            let w: Vec<u32> = row.iter().map(|v| (v * 64.0).round() as u32).collect();
            w
        })
        .collect::<Vec<_>>();
    let rows = normalise(&rows);
    StochMap::from_rows(m.dom().clone(), m.cod().clone(), rows).unwrap()
}

#[test]
fn gaussian_state_helper_is_a_state() {
    let pi = gauss_state(3, 7, false);
    assert_eq!(pi.dom().dim(), 0);
    assert!(pi.cov().symmetric_eigenvalues().min() > 0.0);
}
