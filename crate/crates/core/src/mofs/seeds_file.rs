use super::{MofsError, SeedSpec};
use crate::image::Spel;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Clicked points as exchanged with the CLI and the HTTP service:
/// `{"objects": [{"id": 1, "points": [[x, y], ...]}, ...]}`.
///
/// Points are stored undilated; [`SeedsFile::seed_spec`] applies the 8-neighbor
/// dilation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsFile {
    pub objects: Vec<SeedObject>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedObject {
    pub id: usize,
    pub points: Vec<[i64; 2]>,
}

impl SeedsFile {
    /// Object `m` gets id `m`, in the order given.
    pub fn from_clicks(clicks: &[Vec<Spel>]) -> Self {
        let objects = clicks
            .iter()
            .enumerate()
            .map(|(i, pts)| SeedObject {
                id: i + 1,
                points: pts.iter().map(|p| [p.x as i64, p.y as i64]).collect(),
            })
            .collect();
        Self { objects }
    }

    pub fn parse(text: &str) -> Result<Self, MofsError> {
        serde_json::from_str(text).map_err(|e| MofsError::BadSeedsFile(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MofsError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| MofsError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Clicked points per object, ordered by id. Ids must be exactly `1..=M`.
    pub fn clicks(&self, width: usize, height: usize) -> Result<Vec<Vec<Spel>>, MofsError> {
        if self.objects.is_empty() {
            return Err(MofsError::NoObjects);
        }
        let m = self.objects.len();
        let mut out: Vec<Option<Vec<Spel>>> = vec![None; m];
        for obj in &self.objects {
            if obj.id == 0 || obj.id > m {
                return Err(MofsError::BadSeedsFile(format!("object ids must be 1..={m}, found {}", obj.id)));
            }
            if out[obj.id - 1].is_some() {
                return Err(MofsError::BadSeedsFile(format!("object id {} appears twice", obj.id)));
            }
            if obj.points.is_empty() {
                return Err(MofsError::EmptySeeds { object: obj.id });
            }
            let mut pts = Vec::with_capacity(obj.points.len());
            for &[x, y] in &obj.points {
                if x < 0 || y < 0 || x as u64 >= width as u64 || y as u64 >= height as u64 {
                    return Err(MofsError::SeedOutOfBounds { x, y, width, height });
                }
                pts.push(Spel::new(x as usize, y as usize));
            }
            out[obj.id - 1] = Some(pts);
        }
        Ok(out.into_iter().map(|p| p.expect("every id filled")).collect())
    }

    /// Dilated and validated seed sets.
    pub fn seed_spec(&self, width: usize, height: usize) -> Result<SeedSpec, MofsError> {
        let spec = SeedSpec::from_clicks(&self.clicks(width, height)?, width, height);
        spec.validate(width, height)?;
        Ok(spec)
    }
}
