use ftqc::classical::*;
use ftqc::field::*;
use ftqc::matrix::FpMatrix;
use proptest::prelude::*;

fn f(p: u32) -> PrimeField {
    PrimeField::new(p).unwrap()
}

/// Evaluates sum_i c_i x^i directly, independent of Horner.
fn naive_eval(p: u32, coeffs: &[u32], x: u32) -> u32 {
    let mut acc = 0u64;
    let mut pow = 1u64;
    for &c in coeffs {
        acc += c as u64 * pow;
        pow = pow * x as u64 % p as u64;
    }
    (acc % p as u64) as u32
}

#[test]
fn lagrange_exhaustive_p5() {
    let field = f(5);
    let points: Vec<Fp> = (1..=4).map(|a| field.elem(a)).collect();
    let c = lagrange_coeffs(field, &points).unwrap();
    for idx in 0..625u32 {
        let coeffs = [idx % 5, idx / 5 % 5, idx / 25 % 5, idx / 125];
        let s: u32 = (0..4).map(|j| c[j].value() * naive_eval(5, &coeffs, j as u32 + 1)).sum::<u32>() % 5;
        assert_eq!(s, coeffs[0], "poly {coeffs:?}");
    }
}

#[test]
fn lagrange_x_squared_p11() {
    let field = f(11);
    let points: Vec<Fp> = (1..=7).map(|a| field.elem(a)).collect();
    let c = lagrange_coeffs(field, &points).unwrap();
    let s: u32 = (1..=7u32).map(|a| c[a as usize - 1].value() * (a * a % 11)).sum::<u32>() % 11;
    assert_eq!(s, 0);
}

#[test]
fn lagrange_random_p13() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let field = f(13);
    let points: Vec<Fp> = (1..=6).map(|a| field.elem(a)).collect();
    let c = lagrange_coeffs(field, &points).unwrap();
    for _ in 0..1000 {
        let coeffs: Vec<u32> = (0..6).map(|_| rng.gen_range(0..13)).collect();
        let s: u32 = (0..6).map(|j| c[j].value() * naive_eval(13, &coeffs, j as u32 + 1)).sum::<u32>() % 13;
        assert_eq!(s, coeffs[0]);
    }
}

proptest! {
    #[test]
    fn inverse_is_involution(a in 1u32..9973) {
        let field = f(9973);
        let x = field.elem(a as i64);
        let y = field_inv(field, x).unwrap();
        prop_assert_eq!((x * y).value(), 1);
        prop_assert_eq!(field_inv(field, y).unwrap(), x);
    }

    #[test]
    fn horner_matches_naive(coeffs in proptest::collection::vec(0u32..11, 0..6), x in 0u32..11) {
        let field = f(11);
        let poly = FieldPoly::from_values(field, &coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>());
        prop_assert_eq!(poly_eval(&poly, field.elem(x as i64)).unwrap().value(), naive_eval(11, &coeffs, x));
    }
}

#[test]
fn reed_solomon_dimensions() {
    let (c1, c2) = make_reed_solomon(f(5), 1, &[1, 2, 3, 4]).unwrap();
    assert_eq!((c1.dim(), c2.dim()), (2, 1));
    let (c1, c2) = make_reed_solomon(f(11), 2, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
    assert_eq!((c1.dim(), c2.dim()), (3, 2));
    assert_eq!(min_distance(&c1).unwrap(), 5);
    assert!(min_distance(&dual(&c2)).unwrap() >= 3);
    for r in 0..c2.dim() {
        assert!(c1.contains(c2.generator().row(r)));
    }
}

#[test]
fn reed_solomon_degree_zero() {
    let (c1, c2) = make_reed_solomon(f(5), 0, &[1, 2, 3, 4]).unwrap();
    assert_eq!(c1.dim(), 1);
    assert_eq!(c1.generator().row(0), &[1, 1, 1, 1]);
    assert_eq!(c2.dim(), 0);
}

#[test]
fn reed_solomon_bad_params() {
    assert!(make_reed_solomon(f(5), 4, &[1, 2, 3, 4]).is_err());
    assert!(make_reed_solomon(f(5), 1, &[1, 2, 3, 4, 5]).is_err());
    assert!(make_reed_solomon(f(5), 1, &[1, 1]).is_err());
}

#[test]
fn steane_pair_structure() {
    let ext = extended_hamming();
    assert!(is_doubly_even_selfdual(&ext));
    let (c1, c2) = make_steane_pair();
    assert_eq!((c1.len(), c1.dim(), c2.dim()), (7, 4, 3));
    assert_eq!(min_distance(&c1).unwrap(), 3);
    assert!(c1.contains(&[1; 7]));
    assert!(!c2.contains(&[1; 7]));
    for w in c2.codewords().unwrap() {
        assert_eq!(w.iter().sum::<u32>() % 4, 0);
    }
}

#[test]
fn dual_examples() {
    let f2 = f(2);
    let rep = LinearCode::from_rows(f2, &[vec![1, 1, 1, 1]], 4).unwrap();
    let spc = dual(&rep);
    assert_eq!(spc.dim(), 3);
    assert!(spc.contains(&[1, 1, 0, 0]) && !spc.contains(&[1, 0, 0, 0]));

    let (c1, _) = make_steane_pair();
    let d = dual(&c1);
    assert_eq!(d.dim(), 3);
    // Brute-force dual: all words orthogonal to every Hamming codeword.
    let words = c1.codewords().unwrap();
    let mut count = 0;
    for x in 0..128u32 {
        let v: Vec<u32> = (0..7).map(|i| x >> (6 - i) & 1).collect();
        let orth = words.iter().all(|w| w.iter().zip(&v).map(|(a, b)| a * b).sum::<u32>() % 2 == 0);
        assert_eq!(orth, d.contains(&v));
        count += orth as usize;
    }
    assert_eq!(count, 8);
    let simplex_weights: Vec<usize> =
        d.codewords().unwrap().iter().map(|w| w.iter().filter(|&&x| x == 1).count()).collect();
    assert!(simplex_weights.iter().all(|&w| w == 0 || w == 4));

    let zero = LinearCode::new(f(3), FpMatrix::zeros(0, 4)).unwrap();
    assert_eq!(dual(&zero).dim(), 4);
}

#[test]
fn dual_is_involution_and_dimensions_complement() {
    let (c1, c2) = make_reed_solomon(f(7), 2, &[1, 2, 3, 4, 5]).unwrap();
    for c in [c1, c2] {
        let d = dual(&c);
        assert_eq!(c.dim() + d.dim(), c.len());
        let dd = dual(&d);
        let mut a = c.codewords().unwrap();
        let mut b = dd.codewords().unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}

#[test]
fn syndromes_and_decoding_hamming() {
    let (c1, _) = make_steane_pair();
    for w in c1.codewords().unwrap() {
        assert_eq!(c1.syndrome(&w).unwrap(), vec![0, 0, 0]);
    }
    let mut seen = std::collections::HashSet::new();
    for i in 0..7 {
        let mut e = vec![0; 7];
        e[i] = 1;
        let s = c1.syndrome(&e).unwrap();
        assert!(s.iter().any(|&x| x != 0));
        seen.insert(s.clone());
        let col: Vec<u32> = (0..3).map(|r| c1.parity_check().get(r, i)).collect();
        assert_eq!(s, col);
        let d = c1.decode_min_weight(&s);
        assert_eq!(d.error, ErrorVector::from_pairs([(i, 1)]));
        assert!(!d.beyond_radius);
    }
    assert_eq!(seen.len(), 7);
    assert!(c1.syndrome(&[0; 6]).is_err());
}

#[test]
fn decoding_rs_all_single_errors() {
    let (c1, _) = make_reed_solomon(f(11), 2, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
    for j in 0..7 {
        for v in 1..11 {
            let mut e = vec![0; 7];
            e[j] = v;
            let s = c1.syndrome(&e).unwrap();
            let col: Vec<u32> = (0..4).map(|r| c1.parity_check().get(r, j) * v % 11).collect();
            assert_eq!(s, col);
            assert_eq!(c1.decode_min_weight(&s).error, ErrorVector::from_pairs([(j, v)]));
        }
    }
}

#[test]
fn decoder_flags_beyond_radius() {
    let (c1, _) = make_reed_solomon(f(11), 2, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
    let mut e = vec![0; 7];
    e[0] = 1;
    e[1] = 1;
    e[2] = 1;
    let d = c1.decode_min_weight(&c1.syndrome(&e).unwrap());
    assert!(d.beyond_radius);
    assert!(d.error.weight() >= 3);
}

#[test]
fn tie_break_is_lexicographic() {
    // Repetition code [3,1] over F_2: syndrome of (1,1,0) has leaders {(0,1),(1,1)} at weight 2 and
    // (2,1) at weight 1; the weight-1 leader wins.
    let rep = LinearCode::from_rows(f(2), &[vec![1, 1, 1]], 3).unwrap();
    let s = rep.syndrome(&[1, 1, 0]).unwrap();
    assert_eq!(rep.decode_min_weight(&s).error, ErrorVector::from_pairs([(2, 1)]));
    // [4,1] repetition: weight-2 ties resolved to the smallest positions.
    let rep4 = LinearCode::from_rows(f(2), &[vec![1, 1, 1, 1]], 4).unwrap();
    let s = rep4.syndrome(&[0, 0, 1, 1]).unwrap();
    assert_eq!(rep4.decode_min_weight(&s).error, ErrorVector::from_pairs([(0, 1), (1, 1)]));
}

#[test]
fn text_round_trip() {
    let (c1, c2) = make_reed_solomon(f(11), 2, &[1, 2, 3, 4, 5, 6, 7]).unwrap();
    for c in [c1, c2, make_steane_pair().0] {
        let t = c.to_text();
        let back = LinearCode::from_text(&t).unwrap();
        assert_eq!(back.to_text(), t);
        assert_eq!(back, c);
    }
    assert!(LinearCode::from_text("2 3").is_err());
    assert!(LinearCode::from_text("2 3 1\n1 1 2\n").is_err());
}

fn rs11() -> &'static LinearCode {
    static CODE: std::sync::OnceLock<LinearCode> = std::sync::OnceLock::new();
    CODE.get_or_init(|| make_reed_solomon(f(11), 2, &[1, 2, 3, 4, 5, 6, 7]).unwrap().0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn correctable_errors_are_undone(msg in proptest::collection::vec(0u32..11, 3), pos in 0usize..7, val in 1u32..11) {
        let c1 = rs11();
        let w = c1.generator().transpose().mul_vec(c1.field(), &msg);
        let mut r = w.clone();
        r[pos] = (r[pos] + val) % 11;
        let d = c1.decode_min_weight(&c1.syndrome(&r).unwrap());
        let fixed: Vec<u32> = r.iter().enumerate().map(|(i, &x)| (x + 11 - d.error.get(i)) % 11).collect();
        prop_assert_eq!(fixed, w);
    }
}
