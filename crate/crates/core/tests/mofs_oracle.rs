#[path = "support/oracle.rs"]
mod oracle;

use fuzzyseg::image::Spel;
use fuzzyseg::mofs::{segment, segment_observed, LinkTable, SeedSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use oracle::Instance;

#[test]
fn random_small_grids_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..400 {
        let inst = Instance::random(&mut rng, 5);
        if let Err(e) = oracle::verify(&inst) {
            panic!("instance {i} ({}x{}, {} objects): {e}", inst.width, inst.height, inst.objects());
        }
    }
}

#[test]
fn oracle_rejects_perturbed_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rejected = 0;
    for _ in 0..100 {
        let inst = Instance::random(&mut rng, 5);
        let seg = inst.run();
        let mut bytes = seg.to_bytes();
        let m = inst.objects();
        // lower the grade of the last spel (and its memberships) by one step
        let c = inst.n() - 1;
        let at = 12 + c * (m + 1) * 2;
        let level = u16::from_le_bytes([bytes[at], bytes[at + 1]]);
        if level < 2 || inst.seeds.contains(&c) {
            continue;
        }
        for k in 0..=m {
            let i = at + 2 * k;
            let v = u16::from_le_bytes([bytes[i], bytes[i + 1]]);
            if v == level {
                bytes[i..i + 2].copy_from_slice(&(level - 1).to_le_bytes());
            }
        }
        let bad = fuzzyseg::mofs::Semisegmentation::from_bytes(&bytes).unwrap();
        assert!(oracle::check_fixpoint(&inst, &bad).is_err());
        rejected += 1;
    }
    assert!(rejected > 20);
}

/// Best chain strength by walking every simple path from `seed`.
fn enumerate_chains(w: usize, h: usize, seed: usize, link: &dyn Fn(usize, usize) -> u16) -> Vec<u16> {
    fn walk(
        c: usize,
        strength: u16,
        w: usize,
        h: usize,
        seen: &mut Vec<bool>,
        best: &mut Vec<u16>,
        link: &dyn Fn(usize, usize) -> u16,
    ) {
        best[c] = best[c].max(strength);
        for d in oracle::grid_neighbors(c, w, h) {
            if !seen[d] {
                let s = strength.min(link(c, d));
                if s > 0 {
                    seen[d] = true;
                    walk(d, s, w, h, seen, best, link);
                    seen[d] = false;
                }
            }
        }
    }
    let mut seen = vec![false; w * h];
    let mut best = vec![0u16; w * h];
    seen[seed] = true;
    walk(seed, 1000, w, h, &mut seen, &mut best, link);
    best
}

#[test]
fn four_by_four_matches_chain_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let inst = single_object_grid(&mut rng, 4, 4);
        let seg = inst.run();
        let link = |c: usize, d: usize| inst.psi[0][&(c, d)];
        let best = enumerate_chains(4, 4, inst.seeds[0], &link);
        let map = seg.connectedness_map(1).unwrap();
        for c in 0..16 {
            assert_eq!((map[c] * 1000.0).round() as u16, best[c], "spel {c}");
        }
    }
}

fn single_object_grid(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Instance {
    use rand::Rng;
    let mut psi = std::collections::HashMap::new();
    for c in 0..w * h {
        for d in oracle::grid_neighbors(c, w, h) {
            if c < d {
                let v = rng.random_range(0..=1000u16);
                psi.insert((c, d), v);
                psi.insert((d, c), v);
            }
        }
    }
    Instance { width: w, height: h, seeds: vec![rng.random_range(0..w * h)], psi: vec![psi], shared: true }
}

fn table(w: usize, h: usize, objects: usize, values: &[u16]) -> LinkTable {
    LinkTable::from_fn(w, h, objects, |m, c, d| {
        let i = (m * 7919 + c.min(d) * 31 + c.max(d)) % values.len();
        f64::from(values[i]) / 1000.0
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_a_semisegmentation_and_deterministic(
        w in 2usize..12, h in 2usize..12, objects in 1usize..4,
        values in prop::collection::vec(0u16..=1000, 16..64), salt in 0usize..1000,
    ) {
        let t = table(w, h, objects, &values);
        let seeds = SeedSpec::new((0..objects).map(|m| vec![Spel::new((salt + m * 5) % w, (m * 3) % h)]).collect());
        prop_assume!(seeds.validate(w, h).is_ok());
        let a = segment(w, h, &seeds, &t).unwrap();
        let b = segment(w, h, &seeds, &t).unwrap();
        prop_assert_eq!(a.to_bytes(), b.to_bytes());
        for c in 0..w * h {
            let s = a.sigma(c % w, c / w);
            prop_assert!((0.0..=1.0).contains(&s[0]));
            prop_assert!(s[1..].iter().all(|&v| v == 0.0 || v == s[0]));
            if s[0] > 0.0 {
                prop_assert!(s[1..].contains(&s[0]));
            }
        }
        for set in &seeds.objects {
            for sp in set {
                prop_assert_eq!(a.level(sp.y * w + sp.x), 1000);
            }
        }
    }

    #[test]
    fn extraction_levels_never_increase(
        w in 2usize..10, h in 2usize..10, values in prop::collection::vec(0u16..=1000, 8..40),
    ) {
        let t = table(w, h, 2, &values);
        let seeds = SeedSpec::new(vec![vec![Spel::new(0, 0)], vec![Spel::new(w - 1, h - 1)]]);
        let mut last = u16::MAX;
        let mut ok = true;
        segment_observed(w, h, &seeds, &t, |l, _| {
            ok &= l <= last;
            last = l;
        }).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn adding_a_seed_never_weakens_its_object(
        w in 2usize..9, h in 2usize..9, values in prop::collection::vec(0u16..=1000, 8..40),
        extra_x in 0usize..9, extra_y in 0usize..9, objects in 1usize..3,
    ) {
        let t = table(w, h, objects, &values);
        let other = Spel::new(w - 1, h - 1);
        let extra = Spel::new(extra_x % w, extra_y % h);
        prop_assume!(objects == 1 || extra != other);
        let spec = |first: Vec<Spel>| {
            let mut sets = vec![first];
            if objects == 2 {
                sets.push(vec![other]);
            }
            SeedSpec::new(sets)
        };
        let base = spec(vec![Spel::new(0, 0)]);
        let more = spec(vec![Spel::new(0, 0), extra]);
        let a = segment(w, h, &base, &t).unwrap().connectedness_map(1).unwrap();
        let b = segment(w, h, &more, &t).unwrap().connectedness_map(1).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| y >= x));
    }
}
