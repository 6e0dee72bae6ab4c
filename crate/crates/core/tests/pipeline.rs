//! End-to-end paths through the public API.

use multiperm::channels::{llr, quantize_rank, transmit, ChannelSpec, NoiseSource};
use multiperm::codes::{
    bounded_distance_decode, decode_st, encode_st, enumerate_codebook, st_constraints, ConstraintSet, Entry,
    StCodeParams,
};
use multiperm::decoders::{admm_decode, exhaustive_ml, AdmmOptions, DecodeStatus, FactorGraph};
use multiperm::ensemble::{expected_cardinality, EnsembleParams};
use multiperm::initvec::{estimate_offset, GridSpec, HardStart, SoftStep, TurboDecoder, TurboOptions};
use multiperm::perm::{to_matrix, trace_distance};
use multiperm::polytope::{decompose, in_hull, RelaxedMatrix};
use multiperm::ranking::{rank_mp, unrank_mp};
use multiperm::{InitialVector, MultiplicityVector};
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;

#[test]
fn message_survives_a_quiet_channel() {
    let p = StCodeParams::new(2, 3, 6).unwrap();
    let c = st_constraints(&p);
    let graph = FactorGraph::build(&c);
    let t = InitialVector::natural(6);
    let ch = ChannelSpec::awgn(0.05).unwrap();
    let mut src = NoiseSource::new(2024);
    for msg in (0u32..216).step_by(7) {
        let x = encode_st(&BigUint::from(msg), &p).unwrap();
        let y = transmit(&x, &t, &ch, &mut src);
        let out = admm_decode(&llr(&y, &t, &ch).unwrap(), &graph, &AdmmOptions::default());
        assert_eq!(out.status, DecodeStatus::Converged);
        assert!(out.integral);
        assert_eq!(decode_st(&out.rounded, &p).unwrap(), BigUint::from(msg));
        let ranked = quantize_rank(&y.to_real(&t), x.multiplicity()).unwrap();
        assert_eq!(bounded_distance_decode(ranked.symbols(), &p).unwrap(), x);
    }
}

#[test]
fn certificates_agree_with_ml_on_a_derangement_code() {
    let mult = MultiplicityVector::new(vec![2, 2, 2]).unwrap();
    let c = multiperm::codes::derangement_constraints(&mult);
    let book = enumerate_codebook(&c, 1000).unwrap();
    let graph = FactorGraph::build(&c);
    let t = InitialVector::natural(3);
    let ch = ChannelSpec::awgn(0.6).unwrap();
    let mut src = NoiseSource::new(5);
    let mut certified = 0;
    for k in 0..500 {
        let x = &book[k % book.len()];
        let y = transmit(x, &t, &ch, &mut src);
        let gamma = llr(&y, &t, &ch).unwrap();
        let out = admm_decode(&gamma, &graph, &AdmmOptions::default());
        if out.integral {
            certified += 1;
            assert_eq!(out.rounded, exhaustive_ml(&gamma, &book).unwrap().symbols());
        }
    }
    assert!(certified > 250, "{certified}");
}

#[test]
fn hull_points_from_random_codeword_mixtures() {
    let mult = MultiplicityVector::new(vec![1, 2, 2]).unwrap();
    let book = enumerate_codebook(&ConstraintSet::unconstrained(mult.clone()), 1000).unwrap();
    let mut src = NoiseSource::new(9);
    for _ in 0..50 {
        let mut z = RelaxedMatrix::zeros(3, 5);
        let w: Vec<f64> = (0..4).map(|_| src.uniform() + 0.01).collect();
        let total: f64 = w.iter().sum();
        for &wi in &w {
            let x = to_matrix(&book[src.below(book.len() as u64) as usize]);
            for i in 0..3 {
                for j in 0..5 {
                    z.set(i, j, z.get(i, j) + wi / total * x.get(i, j) as f64);
                }
            }
        }
        assert!(in_hull(&z, &mult, 1e-9));
        let parts = decompose(&z, &mult).unwrap();
        assert!(parts.len() <= (3 - 1) * (5 - 1) + 1);
        let sum: f64 = parts.iter().map(|(w, _)| w).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trace_distance_counts_disagreeing_columns() {
    let mult = MultiplicityVector::new(vec![2, 1, 2]).unwrap();
    for a in 0..30u32 {
        for b in 0..30u32 {
            let x = unrank_mp(&BigUint::from(a), &mult).unwrap();
            let y = unrank_mp(&BigUint::from(b), &mult).unwrap();
            let hamming = x.symbols().iter().zip(y.symbols()).filter(|(p, q)| p != q).count();
            assert_eq!(trace_distance(&to_matrix(&x), &to_matrix(&y)).unwrap(), hamming);
        }
    }
}

#[test]
fn ensemble_means_match_brute_force_averages() {
    let mult = MultiplicityVector::new(vec![2, 1, 2]).unwrap();
    let (m, n) = (3, 5);
    let cells: Vec<Entry> = (0..m).flat_map(|i| (0..n).map(move |j| Entry::new(i, j))).collect();
    let book = enumerate_codebook(&ConstraintSet::unconstrained(mult.clone()), 1000).unwrap();
    let mats: Vec<_> = book.iter().map(to_matrix).collect();
    let bit = |x: &multiperm::MultipermutationMatrix, e: &Entry| x.get(e.row, e.col);

    let kept: usize = cells
        .iter()
        .map(|e| mats.iter().filter(|x| bit(x, e) == 0).count())
        .sum();
    let want = BigRational::new(kept.into(), cells.len().into());
    assert_eq!(
        expected_cardinality(&EnsembleParams::zeros(mult.clone(), 1).unwrap()),
        want
    );

    let mut pairs = 0usize;
    let mut kept = 0usize;
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            pairs += 1;
            kept += mats.iter().filter(|x| bit(x, &cells[a]) == bit(x, &cells[b])).count();
        }
    }
    let want = BigRational::new(kept.into(), pairs.into());
    assert_eq!(
        expected_cardinality(&EnsembleParams::equalities(mult, 1).unwrap()),
        want
    );
}

#[test]
fn turbo_recovers_shifted_levels() {
    let p = StCodeParams::new(2, 3, 6).unwrap();
    let c = st_constraints(&p);
    let dec = TurboDecoder::new(&c);
    let truth = InitialVector::new((1..=6).map(|i| 3.0 + i as f64).collect()).unwrap();
    let opts = TurboOptions {
        grid: GridSpec::new(1.0, true).unwrap(),
        iterations: 1,
        hard: HardStart::Bdd(p),
        soft: SoftStep::ChebyshevLp,
    };
    for msg in [0u32, 100, 215] {
        let x = encode_st(&BigUint::from(msg), &p).unwrap();
        let y = x.values(&truth);
        let out = dec.decode(&y, &opts).unwrap();
        assert_eq!(out.result.rounded, x.symbols());
        assert_eq!(out.estimates[0], truth);
        let eta = estimate_offset(&y, x.multiplicity(), 1.0).unwrap();
        assert!((eta - 3.0).abs() < 1e-12);
    }
}

#[test]
fn zero_set_membership_matches_enumeration() {
    let mult = MultiplicityVector::new(vec![1, 2, 1]).unwrap();
    let c = ConstraintSet::new(mult.clone(), [Entry::new(2, 0), Entry::new(0, 3)], Vec::new()).unwrap();
    let book = enumerate_codebook(&c, 100).unwrap();
    let all = enumerate_codebook(&ConstraintSet::unconstrained(mult), 100).unwrap();
    let kept: Vec<_> = all
        .iter()
        .filter(|x| c.is_member_symbols(x.symbols()))
        .cloned()
        .collect();
    assert_eq!(book, kept);
    assert!(book.iter().all(|x| x.symbols()[0] != 3 && x.symbols()[3] != 1));
}

proptest! {
    #[test]
    fn rank_round_trip(counts in proptest::collection::vec(1usize..4, 1..5), pick in 0u64..u64::MAX) {
        let mult = MultiplicityVector::new(counts).unwrap();
        let total = multiperm::ranking::multinomial(&mult);
        let idx = BigUint::from(pick) % &total;
        let x = unrank_mp(&idx, &mult).unwrap();
        prop_assert_eq!(rank_mp(&x), idx);
    }
}
