use super::{quantize_clamped, BucketQueue, MofsError, SeedSpec, Semisegmentation, LEVELS};
use crate::affinity::{AffinityModel, PreparedAffinity};
use crate::image::GrayImage;

/// Affinity source for the engine. Spels are row-major indices and objects
/// are 0-based; `link` is only queried for edge-adjacent pairs.
pub trait LinkStrength {
    fn objects(&self) -> usize;
    fn link(&self, object: usize, c: usize, d: usize) -> f64;
}

impl LinkStrength for PreparedAffinity<'_> {
    fn objects(&self) -> usize {
        PreparedAffinity::objects(self)
    }

    #[inline]
    fn link(&self, object: usize, c: usize, d: usize) -> f64 {
        PreparedAffinity::link(self, object, c, d)
    }
}

/// Explicit per-object affinities of every directed edge of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    width: usize,
    height: usize,
    objects: usize,
    // [object][spel][direction], directions left, right, up, down
    values: Vec<f64>,
}

impl LinkTable {
    /// Builds the table from `f(object, c, d)` over all edge-adjacent pairs.
    pub fn from_fn(
        width: usize,
        height: usize,
        objects: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let n = width * height;
        let mut values = vec![0.0; objects * n * 4];
        for m in 0..objects {
            for c in 0..n {
                for (dir, d) in neighbors(c, width, height).into_iter().enumerate() {
                    if let Some(d) = d {
                        values[(m * n + c) * 4 + dir] = f(m, c, d);
                    }
                }
            }
        }
        Self { width, height, objects, values }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

impl LinkStrength for LinkTable {
    fn objects(&self) -> usize {
        self.objects
    }

    fn link(&self, object: usize, c: usize, d: usize) -> f64 {
        let dir = neighbors(c, self.width, self.height)
            .iter()
            .position(|&x| x == Some(d))
            .expect("link queried for a non-adjacent pair");
        self.values[(object * self.width * self.height + c) * 4 + dir]
    }
}

#[inline]
fn neighbors(c: usize, width: usize, height: usize) -> [Option<usize>; 4] {
    let (x, y) = (c % width, c / width);
    [
        (x > 0).then(|| c - 1),
        (x + 1 < width).then(|| c + 1),
        (y > 0).then(|| c - width),
        (y + 1 < height).then(|| c + width),
    ]
}

/// Computes the segmentation of a `width x height` grid.
pub fn segment<L: LinkStrength + ?Sized>(
    width: usize,
    height: usize,
    seeds: &SeedSpec,
    links: &L,
) -> Result<Semisegmentation, MofsError> {
    segment_observed(width, height, seeds, links, |_, _| {})
}

/// [`segment`], calling `observer(level, spel)` every time a spel is expanded.
pub fn segment_observed<L: LinkStrength + ?Sized>(
    width: usize,
    height: usize,
    seeds: &SeedSpec,
    links: &L,
    mut observer: impl FnMut(u16, usize),
) -> Result<Semisegmentation, MofsError> {
    seeds.validate(width, height)?;
    if links.objects() != seeds.len() {
        return Err(MofsError::ObjectCountMismatch { model: links.objects(), seeds: seeds.len() });
    }
    let n = width * height;
    let mut level = vec![0u16; n];
    let mut members = vec![0u64; n];
    let mut done = vec![0u64; n];
    let mut queue = BucketQueue::new();
    for (m, set) in seeds.objects.iter().enumerate() {
        for s in set {
            let c = s.y * width + s.x;
            if level[c] == 0 {
                queue.push(LEVELS, c as u32);
            }
            level[c] = LEVELS;
            members[c] |= 1 << m;
        }
    }

    while let Some((lv, c)) = queue.pop() {
        let c = c as usize;
        if lv != level[c] {
            continue;
        }
        let todo = members[c] & !done[c];
        if todo == 0 {
            continue;
        }
        done[c] |= todo;
        observer(lv, c);
        for d in neighbors(c, width, height).into_iter().flatten() {
            let mut bits = todo;
            while bits != 0 {
                let m = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let bit = 1u64 << m;
                let cand = lv.min(quantize_clamped(links.link(m, c, d)));
                if cand == 0 || cand < level[d] {
                    continue;
                }
                if cand > level[d] {
                    level[d] = cand;
                    members[d] = bit;
                    done[d] = 0;
                    queue.push(cand, d as u32);
                } else if members[d] & bit == 0 {
                    members[d] |= bit;
                    queue.push(cand, d as u32);
                }
            }
        }
    }
    Ok(Semisegmentation::from_parts(width, height, seeds.len(), level, members))
}

/// Runs the engine on `img` with an already fitted model.
pub fn segment_image(
    img: &GrayImage,
    seeds: &SeedSpec,
    model: &AffinityModel,
) -> Result<Semisegmentation, MofsError> {
    if model.len() != seeds.len() {
        return Err(MofsError::ObjectCountMismatch { model: model.len(), seeds: seeds.len() });
    }
    seeds.validate(img.width(), img.height())?;
    let prepared = model.prepare(img);
    segment(img.width(), img.height(), seeds, &prepared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Spel;
    use crate::mofs::TieRule;

    fn one_row(links: &[f64]) -> LinkTable {
        let w = links.len() + 1;
        LinkTable::from_fn(w, 1, 1, |_, c, d| links[c.min(d)])
    }

    #[test]
    fn three_spel_chain() {
        let t = one_row(&[0.8, 0.5]);
        let seg = segment(3, 1, &SeedSpec::new(vec![vec![Spel::new(0, 0)]]), &t).unwrap();
        assert_eq!(seg.connectedness_map(1).unwrap(), vec![1.0, 0.8, 0.5]);
        assert_eq!(seg.crisp_labels(TieRule::LowestId).unwrap().labels(), &[1, 1, 1]);
    }

    #[test]
    fn all_ones_connects_everything() {
        let t = LinkTable::from_fn(6, 5, 1, |_, _, _| 1.0);
        let seg = segment(6, 5, &SeedSpec::new(vec![vec![Spel::new(2, 2)]]), &t).unwrap();
        for c in 0..30 {
            assert_eq!(seg.level(c), 1000);
            assert_eq!(seg.members(c), 1);
        }
        assert!(seg.is_segmentation());
    }

    #[test]
    fn equidistant_spel_belongs_to_both() {
        let t = one_row(&[0.7, 0.7]);
        let seeds = SeedSpec::new(vec![vec![Spel::new(0, 0)], vec![Spel::new(2, 0)]]);
        let seg = segment(3, 1, &seeds, &LinkTable::from_fn(3, 1, 2, |_, c, d| t.link(0, c, d))).unwrap();
        assert_eq!(seg.sigma(1, 0), vec![0.7, 0.7, 0.7]);
        assert_eq!(seg.crisp_labels(TieRule::LowestId).unwrap().labels(), &[1, 1, 2]);
        assert_eq!(seg.crisp_labels(TieRule::HighestId).unwrap().labels(), &[1, 2, 2]);
    }

    #[test]
    fn stronger_object_claims_the_middle() {
        let seeds = SeedSpec::new(vec![vec![Spel::new(0, 0)], vec![Spel::new(2, 0)]]);
        let t = LinkTable::from_fn(3, 1, 2, |m, _, _| if m == 0 { 0.9 } else { 0.4 });
        let seg = segment(3, 1, &seeds, &t).unwrap();
        assert_eq!(seg.sigma(1, 0), vec![0.9, 0.9, 0.0]);
        assert_eq!(seg.sigma(2, 0), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_links_leave_spels_unsegmented() {
        let t = one_row(&[0.6, 0.0]);
        let seg = segment(3, 1, &SeedSpec::new(vec![vec![Spel::new(0, 0)]]), &t).unwrap();
        assert!(!seg.is_segmentation());
        assert!(matches!(
            seg.crisp_labels(TieRule::LowestId),
            Err(MofsError::UnsegmentedSpel { x: 2, y: 0 })
        ));
        assert_eq!(seg.crisp_labels_lenient(TieRule::LowestId).labels(), &[1, 1, 0]);
    }

    #[test]
    fn links_are_quantized_before_the_minimum() {
        let t = one_row(&[0.8004, 0.8006]);
        let seg = segment(3, 1, &SeedSpec::new(vec![vec![Spel::new(0, 0)]]), &t).unwrap();
        assert_eq!(seg.connectedness_map(1).unwrap(), vec![1.0, 0.8, 0.8]);
    }

    #[test]
    fn object_count_must_match() {
        let t = one_row(&[0.5]);
        let seeds = SeedSpec::new(vec![vec![Spel::new(0, 0)], vec![Spel::new(1, 0)]]);
        assert!(matches!(segment(2, 1, &seeds, &t), Err(MofsError::ObjectCountMismatch { .. })));
    }

    #[test]
    fn extraction_is_monotone() {
        let t = LinkTable::from_fn(12, 9, 2, |m, c, d| ((c * 7 + d * 13 + m * 5) % 997) as f64 / 996.0);
        let seeds = SeedSpec::new(vec![vec![Spel::new(1, 1)], vec![Spel::new(10, 7)]]);
        let mut last = u16::MAX;
        let mut count = 0;
        segment_observed(12, 9, &seeds, &t, |l, _| {
            assert!(l <= last);
            last = l;
            count += 1;
        })
        .unwrap();
        assert!(count >= 12 * 9);
    }
}
