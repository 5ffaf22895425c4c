use super::{level_value, MofsError, LEVELS};
use crate::image::{encode_png, GrayImage, LabelMap};
use std::path::{Path, PathBuf};

/// How [`Semisegmentation::crisp_labels`] resolves spels owned by several objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    #[default]
    LowestId,
    HighestId,
}

/// Per-spel grade `sigma_0` and the set of objects `m` with `sigma_m = sigma_0`.
///
/// Grades are stored in thousandths. A spel with grade 0 belongs to no object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Semisegmentation {
    width: usize,
    height: usize,
    objects: usize,
    levels: Vec<u16>,
    members: Vec<u64>,
}

impl Semisegmentation {
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        objects: usize,
        levels: Vec<u16>,
        members: Vec<u64>,
    ) -> Self {
        debug_assert!(levels.iter().zip(&members).all(|(&l, &m)| (l == 0) == (m == 0)));
        Self { width, height, objects, levels, members }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of objects `M`.
    pub fn objects(&self) -> usize {
        self.objects
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `sigma_0` of spel `c` in thousandths.
    pub fn level(&self, c: usize) -> u16 {
        self.levels[c]
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    /// Membership mask of spel `c`; bit `m - 1` is object `m`.
    pub fn members(&self, c: usize) -> u64 {
        self.members[c]
    }

    pub fn is_member(&self, c: usize, m: usize) -> bool {
        (1..=self.objects).contains(&m) && self.members[c] >> (m - 1) & 1 == 1
    }

    /// `(sigma_0, sigma_1, .., sigma_M)` at `(x, y)`.
    pub fn sigma(&self, x: usize, y: usize) -> Vec<f64> {
        let c = y * self.width + x;
        let s0 = level_value(self.levels[c]);
        std::iter::once(s0)
            .chain((1..=self.objects).map(|m| if self.is_member(c, m) { s0 } else { 0.0 }))
            .collect()
    }

    /// True when every spel has a positive grade.
    pub fn is_segmentation(&self) -> bool {
        self.levels.iter().all(|&l| l > 0)
    }

    /// `sigma_m` for every spel, row-major.
    pub fn connectedness_map(&self, m: usize) -> Result<Vec<f64>, MofsError> {
        self.check_object(m)?;
        Ok((0..self.len())
            .map(|c| if self.is_member(c, m) { level_value(self.levels[c]) } else { 0.0 })
            .collect())
    }

    /// [`connectedness_map`](Self::connectedness_map) as an image.
    pub fn connectedness_image(&self, m: usize) -> Result<GrayImage, MofsError> {
        Ok(GrayImage::new(self.width, self.height, self.connectedness_map(m)?)?)
    }

    /// One object id per spel. Fails on spels no object reached.
    pub fn crisp_labels(&self, tie: TieRule) -> Result<LabelMap, MofsError> {
        if let Some(c) = self.levels.iter().position(|&l| l == 0) {
            return Err(MofsError::UnsegmentedSpel { x: c % self.width, y: c / self.width });
        }
        Ok(self.crisp_labels_lenient(tie))
    }

    /// Like [`crisp_labels`](Self::crisp_labels) but labels unreached spels 0.
    pub fn crisp_labels_lenient(&self, tie: TieRule) -> LabelMap {
        let labels = self
            .members
            .iter()
            .map(|&mask| match (mask, tie) {
                (0, _) => 0,
                (_, TieRule::LowestId) => mask.trailing_zeros() as u8 + 1,
                (_, TieRule::HighestId) => (64 - mask.leading_zeros()) as u8,
            })
            .collect();
        LabelMap::new(self.width, self.height, labels).expect("dimensions match")
    }

    fn check_object(&self, m: usize) -> Result<(), MofsError> {
        if (1..=self.objects).contains(&m) {
            Ok(())
        } else {
            Err(MofsError::BadObjectId(m))
        }
    }

    /// Little-endian `u32` width, height and `M`, then for every spel the
    /// `M + 1` grades `sigma_0..sigma_M` as `u16` thousandths.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.len() * (self.objects + 1) * 2);
        for v in [self.width, self.height, self.objects] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for c in 0..self.len() {
            let l = self.levels[c];
            out.extend_from_slice(&l.to_le_bytes());
            for m in 1..=self.objects {
                let v = if self.is_member(c, m) { l } else { 0 };
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MofsError> {
        let corrupt = |msg: &str| MofsError::Corrupt(msg.to_string());
        if bytes.len() < 12 {
            return Err(corrupt("truncated header"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap()) as usize;
        let (width, height, objects) = (word(0), word(1), word(2));
        if width == 0 || height == 0 || objects == 0 || objects > super::MAX_OBJECTS {
            return Err(corrupt("invalid header"));
        }
        let n = width.checked_mul(height).ok_or_else(|| corrupt("invalid header"))?;
        if bytes.len() != 12 + n * (objects + 1) * 2 {
            return Err(corrupt("payload length does not match header"));
        }
        let mut values = bytes[12..].chunks_exact(2).map(|b| u16::from_le_bytes([b[0], b[1]]));
        let mut levels = Vec::with_capacity(n);
        let mut members = Vec::with_capacity(n);
        for _ in 0..n {
            let l = values.next().unwrap();
            if l > LEVELS {
                return Err(corrupt("grade above 1000"));
            }
            let mut mask = 0u64;
            for m in 0..objects {
                match values.next().unwrap() {
                    0 => {}
                    v if v == l => mask |= 1 << m,
                    _ => return Err(corrupt("object grade differs from spel grade")),
                }
            }
            if l > 0 && mask == 0 {
                return Err(corrupt("positive grade without an owning object"));
            }
            levels.push(l);
            members.push(mask);
        }
        Ok(Self { width, height, objects, levels, members })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MofsError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|source| io_error(path, source))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MofsError> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|source| io_error(path, source))?)
    }

    /// 8-bit grayscale PNG of object `m` with intensity `sigma_m * 255`.
    pub fn object_png(&self, m: usize) -> Result<Vec<u8>, MofsError> {
        Ok(encode_png(&self.connectedness_image(m)?))
    }

    /// Writes `object_{m}.png` for every object into `dir`.
    pub fn save_object_pngs(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, MofsError> {
        (1..=self.objects)
            .map(|m| {
                let path = dir.as_ref().join(format!("object_{m}.png"));
                std::fs::write(&path, self.object_png(m)?).map_err(|source| io_error(&path, source))?;
                Ok(path)
            })
            .collect()
    }
}

fn io_error(path: &Path, source: std::io::Error) -> MofsError {
    MofsError::Io { path: path.display().to_string(), source }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::decode_image;

    fn sample() -> Semisegmentation {
        Semisegmentation::from_parts(3, 2, 2, vec![1000, 700, 700, 0, 250, 1000], vec![1, 3, 2, 0, 2, 2])
    }

    #[test]
    fn sigma_vectors() {
        let s = sample();
        assert_eq!(s.sigma(1, 0), vec![0.7, 0.7, 0.7]);
        assert_eq!(s.sigma(2, 0), vec![0.7, 0.0, 0.7]);
        assert_eq!(s.sigma(0, 1), vec![0.0, 0.0, 0.0]);
        assert!(!s.is_segmentation());
        assert_eq!(s.connectedness_map(1).unwrap(), vec![1.0, 0.7, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(s.connectedness_map(0), Err(MofsError::BadObjectId(0))));
        assert!(matches!(s.connectedness_map(3), Err(MofsError::BadObjectId(3))));
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        let bytes = s.to_bytes();
        assert_eq!(bytes.len(), 12 + 6 * 3 * 2);
        assert_eq!(&bytes[..4], &3u32.to_le_bytes());
        assert_eq!(&bytes[12..18], &[0xe8, 0x03, 0xe8, 0x03, 0, 0]);
        assert_eq!(Semisegmentation::from_bytes(&bytes).unwrap(), s);
    }

    #[test]
    fn corrupt_inputs_are_rejected() {
        let bytes = sample().to_bytes();
        assert!(Semisegmentation::from_bytes(&bytes[..5]).is_err());
        assert!(Semisegmentation::from_bytes(&bytes[..bytes.len() - 2]).is_err());
        let mut bad = bytes.clone();
        bad[14] = 5;
        assert!(matches!(Semisegmentation::from_bytes(&bad), Err(MofsError::Corrupt(_))));
        let mut orphan = bytes.clone();
        orphan[14] = 0;
        assert!(matches!(Semisegmentation::from_bytes(&orphan), Err(MofsError::Corrupt(_))));
    }

    #[test]
    fn object_png_scales_to_255() {
        let png = sample().object_png(2).unwrap();
        let img = decode_image(&png).unwrap();
        assert_eq!(img.levels(), vec![0, 179, 179, 0, 64, 255]);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        s.save(dir.path().join("seg.fzs")).unwrap();
        assert_eq!(Semisegmentation::load(dir.path().join("seg.fzs")).unwrap(), s);
        let written = s.save_object_pngs(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert!(written[1].ends_with("object_2.png"));
    }
}
