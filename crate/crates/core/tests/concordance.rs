use copula_pmi::concordance::{
    alpha, biconvex, biconvex_checked, comparison_slack, descriptor_mgamma, descriptor_mix,
    descriptor_pi, descriptor_upper, descriptor_v, kappa, kappa_interpolated, kappa_via_e_map,
    ConcordanceSpec, MeasureDescriptor, SpecTag,
};
use copula_pmi::copula::{
    independence, invariant_mix, lower, m_gamma, reflect, upper, v_copula, CopulaModel,
    ReflectionTag,
};
use copula_pmi::families::{fgm, frank, frechet, gaussian};
use copula_pmi::geometry::Rect;
use copula_pmi::quadrature::GaussLegendre;
use copula_pmi::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn specs() -> [ConcordanceSpec; 3] {
    [ConcordanceSpec::pi(), ConcordanceSpec::m_gamma(), ConcordanceSpec::v()]
}

fn random_rect(rng: &mut ChaCha8Rng) -> Rect {
    let (a, b): (f64, f64) = (rng.random(), rng.random());
    let (c, d): (f64, f64) = (rng.random(), rng.random());
    Rect::new(a.min(b), a.max(b), c.min(d), c.max(d))
}

#[test]
fn descriptor_masses() {
    for d in [descriptor_pi(), descriptor_mgamma(), descriptor_v(), descriptor_mix(0.4)] {
        assert!((d.node_mass() - 1.0).abs() < 1e-12);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }
    let half = Rect::new(0.0, 0.5, 0.0, 0.5);
    assert!((descriptor_pi().rect_mass(&half) - 0.25).abs() < 1e-15);
    assert!((descriptor_mgamma().rect_mass(&half) - 0.25).abs() < 1e-15);
    assert!((descriptor_v().rect_mass(&half) - 0.25).abs() < 1e-15);
    // the diamond only touches the corners of the central square
    let center = Rect::new(0.25, 0.75, 0.25, 0.75);
    assert!(descriptor_v().rect_mass(&center).abs() < 1e-15);
    assert!(v_copula().volume(0.25, 0.75, 0.25, 0.75).abs() < 1e-15);
}

#[test]
fn rectangle_masses_match_copula_volumes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases: [(MeasureDescriptor, CopulaModel); 4] = [
        (descriptor_pi(), independence()),
        (descriptor_mgamma(), m_gamma()),
        (descriptor_v(), v_copula()),
        (descriptor_mix(0.3), invariant_mix(0.3).unwrap()),
    ];
    for (d, c) in &cases {
        for _ in 0..1000 {
            let r = random_rect(&mut rng);
            let vol = c.volume(r.u0, r.u1, r.v0, r.v1);
            assert!((d.rect_mass(&r) - vol).abs() < 1e-9, "{} {r:?}", c.label());
        }
    }
}

#[test]
fn node_sums_reproduce_rectangle_masses() {
    let d = descriptor_pi();
    let r = Rect::new(0.0, 0.5, 0.5, 1.0);
    let s: f64 = d
        .nodes()
        .iter()
        .filter(|n| r.contains_open(n.u, n.v))
        .map(|n| n.w)
        .sum();
    assert!((s - 0.25).abs() < 1e-12);
}

#[test]
fn biconvex_examples() {
    for s in specs() {
        assert!((biconvex(&independence(), &s.measure).unwrap() - 0.25).abs() < 1e-12);
    }
    let mpi = biconvex(&upper(), &descriptor_pi()).unwrap();
    assert!((mpi - 1.0 / 3.0).abs() < 1e-12);
    // independent tensor-product cross-check of ∫∫ min(u,v)
    let gl = GaussLegendre::new(200);
    let q: f64 = [(0.0, 0.5), (0.5, 1.0)]
        .iter()
        .map(|&(a, b)| {
            gl.on_interval(a, b)
                .map(|(x, wx)| {
                    wx * (gl.integrate(0.0, x, |y| y) + gl.integrate(x, 1.0, |_| x))
                })
                .sum::<f64>()
        })
        .sum();
    assert!((mpi - q).abs() < 1e-12);
    assert!((biconvex(&upper(), &descriptor_upper()).unwrap() - 0.5).abs() < 1e-12);
    let g = gaussian(0.5).unwrap();
    for s in specs() {
        let b = biconvex(&g, &s.measure).unwrap();
        assert!((0.0..=0.5).contains(&b));
    }
}

#[test]
fn biconvex_is_symmetric_where_both_sides_exist() {
    let pi = descriptor_pi();
    let mdesc = descriptor_upper();
    let a = biconvex(&upper(), &pi).unwrap();
    let b = biconvex(&independence(), &mdesc).unwrap();
    assert!((a - b).abs() < 1e-12);
    let a = biconvex(&m_gamma(), &pi).unwrap();
    let b = biconvex(&independence(), &descriptor_mgamma()).unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn biconvex_error_estimate() {
    let g = gaussian(0.3).unwrap();
    assert!(biconvex_checked(&g, &descriptor_pi(), 1e-9).is_ok());
    // a copula with a kink off the panel edges is integrated less accurately
    let mo = copula_pmi::families::marshall_olkin(0.3, 0.6).unwrap();
    assert!(matches!(
        biconvex_checked(&mo, &descriptor_pi(), 1e-15),
        Err(Error::QuadratureFailure { .. })
    ));
}

#[test]
fn alpha_values() {
    let s = specs();
    assert!((s[0].alpha - 12.0).abs() < 1e-9);
    assert!((s[1].alpha - 8.0).abs() < 1e-9);
    assert!((s[2].alpha - 16.0).abs() < 1e-9);
    assert!((alpha(&independence(), &descriptor_pi()).unwrap() - 12.0).abs() < 1e-9);
    assert!(matches!(
        alpha(&gaussian(0.4).unwrap(), &descriptor_pi()),
        Err(Error::NotInvariant(_))
    ));
    for a in [0.0, 0.25, 0.5, 1.0] {
        let sp = ConcordanceSpec::new(SpecTag::Mix(a)).unwrap();
        assert!((sp.alpha - 24.0 / (2.0 + a)).abs() < 1e-9);
    }
}

#[test]
fn kappa_examples() {
    for s in specs() {
        assert!((kappa(&upper(), &s).unwrap() - 1.0).abs() < 1e-9);
        assert!(kappa(&independence(), &s).unwrap().abs() < 1e-12);
        assert!((kappa(&lower(), &s).unwrap() + 1.0).abs() < 1e-9);
    }
    // Spearman's rho of the Gaussian copula is (6/π) asin(ρ/2)
    let rho: f64 = 0.5;
    let g = gaussian(rho).unwrap();
    let expected = 6.0 / std::f64::consts::PI * (rho / 2.0).asin();
    assert!((kappa(&g, &ConcordanceSpec::pi()).unwrap() - expected).abs() < 1e-9);
    // Gini's gamma of FGM(θ) is 4θ/15, Spearman's rho θ/3
    let f = fgm(0.9).unwrap();
    assert!((kappa(&f, &ConcordanceSpec::pi()).unwrap() - 0.3).abs() < 1e-12);
    assert!((kappa(&f, &ConcordanceSpec::m_gamma()).unwrap() - 4.0 * 0.9 / 15.0).abs() < 1e-9);
}

#[test]
fn kappa_interpolation_paths_agree() {
    let g = gaussian(0.5).unwrap();
    for a in [0.0, 0.5, 1.0] {
        let k = kappa_interpolated(&g, a).unwrap();
        assert!((k.direct - k.weighted).abs() < 1e-8);
    }
    let k0 = kappa_interpolated(&g, 0.0).unwrap();
    assert!((k0.direct - kappa(&g, &ConcordanceSpec::pi()).unwrap()).abs() < 1e-12);
    let k1 = kappa_interpolated(&g, 1.0).unwrap();
    assert!((k1.direct - kappa(&g, &ConcordanceSpec::m_gamma()).unwrap()).abs() < 1e-12);
    assert!(kappa_interpolated(&g, 1.5).is_err());
}

#[test]
fn comparison_slack_examples() {
    let pi = ConcordanceSpec::pi();
    let mg = ConcordanceSpec::m_gamma();
    let v = ConcordanceSpec::v();
    let s = comparison_slack(&gaussian(0.7).unwrap(), &pi, &mg).unwrap();
    assert!(s >= 0.0);
    assert!(comparison_slack(&independence(), &pi, &mg).unwrap().abs() < 1e-12);
    assert!(comparison_slack(&frank(-5.0).unwrap(), &pi, &mg).unwrap() <= 1e-6);
    assert!(comparison_slack(&gaussian(0.7).unwrap(), &v, &pi).unwrap() >= -1e-6);
    assert!(matches!(
        comparison_slack(&gaussian(0.7).unwrap(), &mg, &v),
        Err(Error::OrderViolated)
    ));
}

#[test]
fn kappa_respects_reflections() {
    let models = [
        gaussian(0.5).unwrap(),
        gaussian(-0.5).unwrap(),
        frank(3.0).unwrap(),
        frank(-3.0).unwrap(),
    ];
    for c in &models {
        for s in specs() {
            let k = kappa(c, &s).unwrap();
            let k1 = kappa(&reflect(c, ReflectionTag::Nu1), &s).unwrap();
            let kp = kappa(&reflect(c, ReflectionTag::Pi), &s).unwrap();
            assert!((k + k1).abs() < 1e-8);
            assert!((k - kp).abs() < 1e-8);
        }
    }
}

#[test]
fn kappa_is_monotone_along_frechet_chains() {
    let chain: Vec<CopulaModel> = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
        .iter()
        .map(|&a| frechet(a, 0.0).unwrap())
        .collect();
    for s in specs() {
        let vals: Vec<f64> = chain.iter().map(|c| biconvex(c, &s.measure).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-9);
        }
    }
}

#[test]
fn lower_left_representation_matches_direct_path() {
    let models = [upper(), gaussian(0.5).unwrap(), frank(3.0).unwrap(), fgm(1.0).unwrap()];
    let whole_factor = [3.0, 2.0, 4.0];
    for c in &models {
        for (s, f) in specs().iter().zip(whole_factor) {
            let direct = kappa(c, s).unwrap();
            let via = kappa_via_e_map(c, s);
            assert!((direct - via).abs() < 1e-6, "{} {}", c.label(), s.tag);
            // equivalent whole-square form with factor α(A)/4
            let whole = f * s.measure.integrate(|u, v| copula_pmi::copula::e_map(c, u, v));
            assert!((direct - whole).abs() < 1e-6);
            // 4[C,A] - 1 = 4 ∫_{(0,1/2)²} E_C dμ_A
            let lhs = 4.0 * biconvex(c, &s.measure).unwrap() - 1.0;
            let rhs = 4.0 * s.measure.integrate_lower_left(|u, v| copula_pmi::copula::e_map(c, u, v));
            assert!((lhs - rhs).abs() < 1e-6);
        }
    }
}

#[test]
fn cell_integrals_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let gl = GaussLegendre::new(400);
    for s in [
        ConcordanceSpec::pi(),
        ConcordanceSpec::m_gamma(),
        ConcordanceSpec::v(),
        ConcordanceSpec::new(SpecTag::Mix(0.6)).unwrap(),
    ] {
        for _ in 0..20 {
            let r = random_rect(&mut rng);
            let q: f64 = gl
                .on_interval(r.u0, r.u1)
                .map(|(x, wx)| wx * gl.integrate(r.v0, r.v1, |y| s.eval(x, y)))
                .sum();
            assert!((s.cell_integral(&r) - q).abs() < 1e-6, "{} {r:?}", s.tag);
        }
    }
}
