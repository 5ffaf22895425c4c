//! Exhaustive max-min connectedness used to check the segmentation engine.
#![allow(dead_code)]

use fuzzyseg::image::Spel;
use fuzzyseg::mofs::{segment, LinkTable, SeedSpec, Semisegmentation};
use rand::Rng;

/// A small grid with quantized directed affinities per object and one seed
/// spel per object.
#[derive(Debug, Clone)]
pub struct Instance {
    pub width: usize,
    pub height: usize,
    pub seeds: Vec<usize>,
    /// `psi[m][(c, d)]` in thousandths, for edge-adjacent `c`, `d`.
    pub psi: Vec<std::collections::HashMap<(usize, usize), u16>>,
    pub shared: bool,
}

impl Instance {
    pub fn random(rng: &mut dyn rand::RngCore, max_side: usize) -> Self {
        let width = rng.random_range(1..=max_side);
        let height = rng.random_range(1..=max_side);
        let n = width * height;
        let objects = if n >= 2 { rng.random_range(1..=2) } else { 1 };
        let mut seeds = Vec::new();
        while seeds.len() < objects {
            let s = rng.random_range(0..n);
            if !seeds.contains(&s) {
                seeds.push(s);
            }
        }
        let shared = rng.random_bool(0.5);
        // few distinct levels make ties common
        let coarse = rng.random_bool(0.5);
        let draw = |rng: &mut dyn rand::RngCore| -> u16 {
            if coarse {
                [0u16, 300, 500, 700, 1000][rng.random_range(0..5)]
            } else {
                rng.random_range(0..=1000)
            }
        };
        let mut psi = vec![std::collections::HashMap::new(); objects];
        for c in 0..n {
            for d in grid_neighbors(c, width, height) {
                if c < d {
                    let shared_v = draw(rng);
                    for table in psi.iter_mut() {
                        let v = if shared { shared_v } else { draw(rng) };
                        table.insert((c, d), v);
                        table.insert((d, c), v);
                    }
                }
            }
        }
        Self { width, height, seeds, psi, shared }
    }

    pub fn objects(&self) -> usize {
        self.seeds.len()
    }

    pub fn n(&self) -> usize {
        self.width * self.height
    }

    pub fn seed_spec(&self) -> SeedSpec {
        SeedSpec::new(self.seeds.iter().map(|&s| vec![Spel::new(s % self.width, s / self.width)]).collect())
    }

    pub fn links(&self) -> LinkTable {
        LinkTable::from_fn(self.width, self.height, self.objects(), |m, c, d| {
            f64::from(self.psi[m][&(c, d)]) / 1000.0
        })
    }

    pub fn run(&self) -> Semisegmentation {
        segment(self.width, self.height, &self.seed_spec(), &self.links()).expect("valid instance")
    }
}

pub fn grid_neighbors(c: usize, width: usize, height: usize) -> Vec<usize> {
    let (x, y) = (c % width, c / width);
    let mut v = Vec::new();
    if x > 0 {
        v.push(c - 1);
    }
    if x + 1 < width {
        v.push(c + 1);
    }
    if y > 0 {
        v.push(c - width);
    }
    if y + 1 < height {
        v.push(c + width);
    }
    v
}

/// Max-min closure of a strength matrix (Floyd-Warshall over the
/// (max, min) semiring). Diagonal entries are 1000: a one-spel chain has
/// full strength.
pub fn max_min_closure(n: usize, link: impl Fn(usize, usize) -> u16) -> Vec<Vec<u16>> {
    let mut a = vec![vec![0u16; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1000 } else { link(i, j) };
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = a[i][k].min(a[k][j]);
                if via > a[i][j] {
                    a[i][j] = via;
                }
            }
        }
    }
    a
}

/// Connectedness of every spel from the seed of object `m` (0-based) over
/// all chains, ignoring the other objects.
pub fn independent_connectedness(inst: &Instance, m: usize) -> Vec<u16> {
    let a = max_min_closure(inst.n(), |i, j| inst.psi[m].get(&(i, j)).copied().unwrap_or(0));
    a[inst.seeds[m]].clone()
}

/// Checks that `seg` is the fixpoint of multi-object connectedness: for each
/// object, the strongest chains running only through spels of that object
/// reproduce the grade of every spel it owns and fall short of the grade of
/// every spel it does not own.
pub fn check_fixpoint(inst: &Instance, seg: &Semisegmentation) -> Result<(), String> {
    let n = inst.n();
    for m in 0..inst.objects() {
        let owned: Vec<bool> = (0..n).map(|c| seg.is_member(c, m + 1)).collect();
        let a = max_min_closure(n, |i, j| {
            if owned[i] && owned[j] {
                inst.psi[m].get(&(i, j)).copied().unwrap_or(0)
            } else {
                0
            }
        });
        let seed = inst.seeds[m];
        if !owned[seed] {
            return Err(format!("object {} does not own its seed", m + 1));
        }
        let within: Vec<u16> = (0..n).map(|c| if owned[c] { a[seed][c] } else { 0 }).collect();
        for c in 0..n {
            let level = seg.level(c);
            if owned[c] {
                if within[c] != level {
                    return Err(format!("object {} spel {c}: chain strength {} vs grade {level}", m + 1, within[c]));
                }
            } else {
                let reach = grid_neighbors(c, inst.width, inst.height)
                    .into_iter()
                    .filter(|&u| owned[u])
                    .map(|u| within[u].min(inst.psi[m][&(u, c)]))
                    .max()
                    .unwrap_or(0);
                if reach > 0 && reach >= level {
                    return Err(format!("object {} reaches spel {c} at {reach} but grade is {level}", m + 1));
                }
            }
        }
    }
    Ok(())
}

/// Every check that applies to the instance.
pub fn verify(inst: &Instance) -> Result<(), String> {
    let seg = inst.run();
    for c in 0..inst.n() {
        if (seg.level(c) == 0) != (seg.members(c) == 0) {
            return Err(format!("spel {c}: grade and membership disagree"));
        }
    }
    check_fixpoint(inst, &seg)?;
    let independent: Vec<Vec<u16>> = (0..inst.objects()).map(|m| independent_connectedness(inst, m)).collect();
    if inst.objects() == 1 {
        for c in 0..inst.n() {
            if seg.level(c) != independent[0][c] {
                return Err(format!("spel {c}: grade {} vs strongest chain {}", seg.level(c), independent[0][c]));
            }
        }
    }
    if inst.shared {
        // with one affinity for all objects the grade is the plain strongest
        // chain from any seed, and owners are among the objects attaining it
        for c in 0..inst.n() {
            let best = independent.iter().map(|v| v[c]).max().unwrap();
            if seg.level(c) != best {
                return Err(format!("spel {c}: grade {} vs strongest chain {best}", seg.level(c)));
            }
            for (m, v) in independent.iter().enumerate() {
                if seg.is_member(c, m + 1) && v[c] != best {
                    return Err(format!("spel {c}: object {} owns it with a weaker chain", m + 1));
                }
            }
        }
    }
    Ok(())
}
