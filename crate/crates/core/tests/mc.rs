//! Monte Carlo integrals: wedge densities, sign identities, linking and the
//! crossing unit integral.

use bcrlab_core::diagram::{degree_two, wheel_diagram};
use bcrlab_core::mc::{
    diagram_factors, form_density, hopf_pair, linking_estimate, phi_difference_estimate, raw_wedge_density,
    sphere_volume, wedge_density, z2_estimate, z2_term_one, z2_term_three, z2_term_two, Configuration, Embedding,
    Factor, MCConfig, Point, SpherePiece,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn random_config(rng: &mut ChaCha8Rng, n: usize, q: usize, s: usize) -> Configuration {
    let mut pt = |d: usize| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<f64>>();
    Configuration { knot: (0..q).map(|_| pt(n)).collect(), ambient: (0..s).map(|_| pt(n + 2)).collect() }
}

/// Gauss vector and its Jacobian against all configuration coordinates.
fn factor_data(f: &Factor, emb: &Embedding, c: &Configuration) -> (Vec<f64>, DMatrix<f64>) {
    let n = emb.n();
    let q = c.knot.len();
    let dim = c.dim(n);
    let place = |p: Point, sgn: f64, jac: &mut DMatrix<f64>| -> Vec<f64> {
        match p {
            Point::Knot(i) => {
                let j = emb.jacobian(&c.knot[i]);
                for r in 0..n + 2 {
                    for k in 0..n {
                        jac[(r, i * n + k)] += sgn * j[(r, k)];
                    }
                }
                emb.eval(&c.knot[i])
            }
            Point::Ambient(i) => {
                for r in 0..n + 2 {
                    jac[(r, q * n + i * (n + 2) + r)] += sgn;
                }
                c.ambient[i].clone()
            }
        }
    };
    match *f {
        Factor::Theta { from, to } => {
            let mut jac = DMatrix::zeros(n + 2, dim);
            let b = place(to, 1.0, &mut jac);
            let a = place(from, -1.0, &mut jac);
            (b.iter().zip(&a).map(|(x, y)| x - y).collect(), jac)
        }
        Factor::Eta { from, to } => {
            let mut jac = DMatrix::zeros(n, dim);
            for k in 0..n {
                jac[(k, to * n + k)] += 1.0;
                jac[(k, from * n + k)] -= 1.0;
            }
            (c.knot[to].iter().zip(&c.knot[from]).map(|(x, y)| x - y).collect(), jac)
        }
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out: Vec<Vec<usize>> =
        combinations(&items[1..], k - 1).into_iter().map(|mut c| {
            c.insert(0, items[0]);
            c
        }).collect();
    out.extend(combinations(&items[1..], k));
    out
}

fn perm_sign(seq: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

/// Coefficient of dx_1 ∧ … ∧ dx_D in ω_1 ∧ … ∧ ω_r, each ω = u*vol_{S^p}/vol S^p
/// written out in coordinates: ω_S = det[w | Dw_S] / ‖w‖^{p+1}.
fn exterior_oracle(factors: &[Factor], emb: &Embedding, c: &Configuration) -> f64 {
    let n = emb.n();
    let data: Vec<(Vec<f64>, DMatrix<f64>, usize)> = factors
        .iter()
        .map(|f| {
            let (w, j) = factor_data(f, emb, c);
            (w, j, f.degree(n))
        })
        .collect();
    let mut memo: Vec<HashMap<Vec<usize>, f64>> = vec![HashMap::new(); factors.len()];
    fn coeff(d: &(Vec<f64>, DMatrix<f64>, usize), s: &[usize]) -> f64 {
        let (w, j, p) = d;
        let mut m = DMatrix::zeros(p + 1, p + 1);
        for r in 0..=*p {
            m[(r, 0)] = w[r];
            for (k, col) in s.iter().enumerate() {
                m[(r, k + 1)] = j[(r, *col)];
            }
        }
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        m.determinant() / (len.powi(*p as i32 + 1) * sphere_volume(*p))
    }
    fn rec(
        i: usize,
        remaining: &[usize],
        chosen: &mut Vec<usize>,
        data: &[(Vec<f64>, DMatrix<f64>, usize)],
        memo: &mut [HashMap<Vec<usize>, f64>],
    ) -> f64 {
        if i == data.len() {
            return perm_sign(chosen);
        }
        let mut acc = 0.0;
        for s in combinations(remaining, data[i].2) {
            let cs = *memo[i].entry(s.clone()).or_insert_with(|| coeff(&data[i], &s));
            if cs == 0.0 {
                continue;
            }
            let rest: Vec<usize> = remaining.iter().copied().filter(|x| !s.contains(x)).collect();
            let len = chosen.len();
            chosen.extend(&s);
            acc += cs * rec(i + 1, &rest, chosen, data, memo);
            chosen.truncate(len);
        }
        acc
    }
    let all: Vec<usize> = (0..c.dim(n)).collect();
    rec(0, &all, &mut Vec::new(), &data, &mut memo)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn wedge_density_matches_exterior_algebra_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    // n = 2 exercises odd form degrees (θ: 3, η: 1) and hence the column sign.
    for n in [2usize, 3] {
        let emb = Embedding::Bump { n, amplitude: 0.8 };
        let mut cases: Vec<(Vec<Factor>, usize, usize)> = vec![
            (diagram_factors(&wheel_diagram(2)).unwrap(), 4, 0),
            (diagram_factors(&degree_two(1)).unwrap(), 3, 1),
            (diagram_factors(&degree_two(2)).unwrap(), 4, 0),
        ];
        if n == 3 {
            cases.push((z2_term_two(), 4, 0));
        }
        for (factors, q, s) in cases {
            for _ in 0..2 {
                let c = random_config(&mut rng, n, q, s);
                let got = wedge_density(&factors, &emb, &c).unwrap();
                let want = exterior_oracle(&factors, &emb, &c);
                assert!(close(got, want, 1e-8), "n={n} {factors:?}: {got} vs {want}");
                assert!(got != 0.0);
            }
        }
    }
}

#[test]
fn canonical_reordering_agrees_with_raw_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [2usize, 3] {
        let emb = Embedding::Bump { n, amplitude: 0.6 };
        let base = diagram_factors(&degree_two(1)).unwrap();
        for _ in 0..10 {
            let c = random_config(&mut rng, n, 3, 1);
            let mut f = base.clone();
            for i in (1..f.len()).rev() {
                f.swap(i, rng.gen_range(0..=i));
            }
            let a = wedge_density(&f, &emb, &c).unwrap();
            let b = raw_wedge_density(&f, &emb, &c).unwrap();
            assert!(close(a, b, 1e-9), "{a} vs {b}");
        }
    }
}

#[test]
fn edge_reversal_and_vertex_orientation_signs_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [2usize, 3] {
        let emb = Embedding::Bump { n, amplitude: 0.7 };
        let d = degree_two(1);
        let dbar = d.reverse_vertex_orientation();
        let w = wheel_diagram(2);
        for _ in 0..20 {
            let c = random_config(&mut rng, n, 3, 1);
            let v = form_density(&d, &emb, &c).unwrap();
            // ω(Γ̄) = (−1)^{n+1} ω(Γ)
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(form_density(&dbar, &emb, &c).unwrap(), sign * v);
            // reversing an edge negates its p+1 rows: (−1)^{p+1} = (−1)^n for θ and η
            let fs = diagram_factors(&d).unwrap();
            for i in 0..fs.len() {
                let mut g = fs.clone();
                g[i] = g[i].reversed();
                let rev_sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                assert_eq!(wedge_density(&g, &emb, &c).unwrap(), rev_sign * v);
            }
            let c4 = random_config(&mut rng, n, 4, 0);
            let v4 = form_density(&w, &emb, &c4).unwrap();
            let fw = diagram_factors(&w).unwrap();
            for i in 0..fw.len() {
                let mut g = fw.clone();
                g[i] = g[i].reversed();
                let rev_sign = if n % 2 == 1 { -1.0 } else { 1.0 };
                assert_eq!(wedge_density(&g, &emb, &c4).unwrap(), rev_sign * v4);
            }
        }
    }
}

#[test]
fn degenerate_diagrams_vanish_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let emb = Embedding::Bump { n: 3, amplitude: 0.9 };
    // Γ_4: two internal vertices feeding each other; Γ_5: an η 2-cycle.
    for (idx, q, s) in [(4usize, 2usize, 2usize), (5, 4, 0)] {
        let d = degree_two(idx);
        assert_eq!((d.external_count(), d.internal_count()), (q, s));
        for _ in 0..20 {
            assert_eq!(form_density(&d, &emb, &random_config(&mut rng, 3, q, s)).unwrap(), 0.0);
        }
    }
}

#[test]
fn standard_plane_densities_vanish_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plane = Embedding::StandardPlane { n: 3 };
    for _ in 0..50 {
        let c31 = random_config(&mut rng, 3, 3, 1);
        let c40 = random_config(&mut rng, 3, 4, 0);
        assert_eq!(wedge_density(&z2_term_one(), &plane, &c31).unwrap(), 0.0);
        assert_eq!(wedge_density(&z2_term_two(), &plane, &c40).unwrap(), 0.0);
        assert_eq!(wedge_density(&z2_term_three(), &plane, &c40).unwrap(), 0.0);
        assert_eq!(form_density(&wheel_diagram(2), &plane, &c40).unwrap(), 0.0);
    }
    let rep = z2_estimate(&plane, &MCConfig::with_samples(2_000, 1)).unwrap();
    assert_eq!(rep.estimate.mean, 0.0);
    assert_eq!(rep.estimate.stderr, 0.0);
    let anti = MCConfig { antithetic: true, ..MCConfig::with_samples(2_000, 1) };
    assert_eq!(z2_estimate(&plane, &anti).unwrap().estimate.mean, 0.0);
}

#[test]
fn degree_mismatch_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let emb = Embedding::StandardPlane { n: 3 };
    assert!(wedge_density(&z2_term_one(), &emb, &random_config(&mut rng, 3, 4, 0)).is_err());
    assert!(wedge_density(&z2_term_two(), &emb, &random_config(&mut rng, 3, 3, 1)).is_err());
    assert!(form_density(&wheel_diagram(3), &emb, &random_config(&mut rng, 3, 4, 0)).is_err());
}

#[test]
fn hopf_linking_and_sign_conventions() {
    let (a, b) = hopf_pair();
    let cfg = MCConfig::with_samples(200_000, 42);
    let e = linking_estimate(&a, &b, &cfg).unwrap();
    assert!((e.mean - 1.0).abs() < 4.0 * e.stderr && (e.mean - 1.0).abs() < 0.03, "{e:?}");
    assert_eq!(e, linking_estimate(&a, &b, &cfg).unwrap());
    let br = SpherePiece { reversed: !b.reversed, ..b.clone() };
    let r = linking_estimate(&a, &br, &cfg).unwrap();
    assert_eq!(r.mean, -e.mean);
    assert!(r.batch_means.iter().zip(&e.batch_means).all(|(x, y)| *x == -*y));
    let far = SpherePiece { center: vec![10.0, 0.0, 0.0, 0.0, 0.0], ..b.clone() };
    let f = linking_estimate(&a, &far, &cfg).unwrap();
    assert!(f.mean.abs() < 4.0 * f.stderr.max(1e-6), "{f:?}");
    let half = MCConfig { delta: cfg.delta / 2.0, ..cfg.clone() };
    assert!((linking_estimate(&a, &b, &half).unwrap().mean - e.mean).abs() < e.stderr);
    let overlapping = SpherePiece { center: vec![0.0; 5], ..b };
    assert!(linking_estimate(&a, &overlapping, &cfg).is_err());
}

#[test]
fn stderr_scales_like_inverse_root_n() {
    let (a, b) = hopf_pair();
    let e1 = linking_estimate(&a, &b, &MCConfig::with_samples(100_000, 5)).unwrap();
    let e2 = linking_estimate(&a, &b, &MCConfig::with_samples(200_000, 6)).unwrap();
    let ratio = e2.stderr / e1.stderr;
    assert!((ratio - 1.0 / 2f64.sqrt()).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn crossing_unit_integral() {
    let cfg = MCConfig::with_samples(400_000, 7);
    let e = phi_difference_estimate(2, 1, 0.1, &cfg, false).unwrap();
    assert!((e.mean - 1.0).abs() < 5.0 * e.stderr && (e.mean - 1.0).abs() < 0.05, "{e:?}");
    let s = phi_difference_estimate(2, 1, 0.1, &cfg, true).unwrap();
    assert_eq!(s.mean, -e.mean);
    assert_eq!(e, phi_difference_estimate(2, 1, 0.1, &cfg, false).unwrap());
    let h = phi_difference_estimate(2, 1, 0.05, &cfg, false).unwrap();
    assert!((h.mean - e.mean).abs() < 5.0 * e.stderr.max(h.stderr), "{e:?} vs {h:?}");
    assert!(phi_difference_estimate(2, 1, 0.5, &cfg, false).is_err());
    assert!(phi_difference_estimate(2, 3, 0.1, &cfg, false).is_err());
}

#[test]
fn config_validation() {
    let (a, b) = hopf_pair();
    for bad in [
        MCConfig { samples: 0, ..MCConfig::default() },
        MCConfig { delta: 0.0, ..MCConfig::default() },
        MCConfig { batches: 1, ..MCConfig::default() },
    ] {
        assert!(linking_estimate(&a, &b, &bad).is_err());
    }
}
