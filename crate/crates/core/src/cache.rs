//! On-disk cache of exact moment tables, one JSON file per `(family, 2α)`.
//!
//! ```json
//! {"family": "unbalanced", "twoAlpha": 2, "support": ["-1/16", "1/256"],
//!  "moments": ["1", "-7/3876", ...], "sha256": "..."}
//! ```
//!
//! Files are written to a temporary file in the cache directory and renamed
//! into place, so concurrent readers never observe a partial table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{ExactRational, HalfIntegerAlpha};
use crate::moments::{moment, moment_table, MomentFamily, MomentSequence, Support};

/// Entries re-derived per table by [`MomentCache::verify`].
pub const VERIFY_SAMPLES: usize = 3;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    family: MomentFamily,
    #[serde(rename = "twoAlpha")]
    two_alpha: u32,
    support: Support,
    moments: Vec<ExactRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sha256: Option<String>,
}

fn checksum(moments: &[ExactRational]) -> String {
    let mut hasher = Sha256::new();
    for m in moments {
        hasher.update(m.to_string().as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheEntry {
    pub family: MomentFamily,
    pub alpha: HalfIntegerAlpha,
    /// Highest cached moment order.
    pub order: usize,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Ok { checked: Vec<usize> },
    Corrupt { detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub path: PathBuf,
    pub outcome: VerifyOutcome,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, VerifyOutcome::Ok { .. })
    }
}

#[derive(Clone, Debug)]
pub struct MomentCache {
    dir: PathBuf,
}

impl MomentCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::MissingCacheDir(dir));
        }
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, family: MomentFamily, alpha: HalfIntegerAlpha) -> PathBuf {
        self.dir
            .join(format!("{}-{}.json", family.name(), alpha.two_alpha()))
    }

    fn read(path: &Path) -> Result<CacheFile> {
        let corrupt = |detail: String| Error::CacheCorrupt {
            path: path.to_path_buf(),
            detail,
        };
        let text = fs::read_to_string(path)?;
        let file: CacheFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        let alpha = HalfIntegerAlpha::new(file.two_alpha).map_err(|e| corrupt(e.to_string()))?;
        file.family
            .check_alpha(alpha)
            .map_err(|e| corrupt(e.to_string()))?;
        if file.support != file.family.support() {
            return Err(corrupt(format!(
                "support does not match the {} family",
                file.family
            )));
        }
        if file.moments.first() != Some(&ExactRational::one()) {
            return Err(corrupt("entry 0 is not 1".into()));
        }
        Ok(file)
    }

    fn to_sequence(file: CacheFile) -> Result<MomentSequence> {
        let alpha = HalfIntegerAlpha::new(file.two_alpha)?;
        Ok(MomentSequence::new(
            file.family,
            alpha,
            file.support,
            file.moments,
        ))
    }

    /// The cached table for `(family, alpha)`, if present.
    pub fn load(
        &self,
        family: MomentFamily,
        alpha: HalfIntegerAlpha,
    ) -> Result<Option<MomentSequence>> {
        let path = self.path_for(family, alpha);
        if !path.exists() {
            return Ok(None);
        }
        let file = Self::read(&path)?;
        if file.family != family || file.two_alpha != alpha.two_alpha() {
            return Err(Error::CacheCorrupt {
                path,
                detail: "key does not match file name".into(),
            });
        }
        let mut seq = Self::to_sequence(file)?;
        if let Ok(t) = fs::metadata(&path).and_then(|m| m.modified()) {
            seq.generated_at = t;
        }
        Ok(Some(seq))
    }

    pub fn store(&self, moments: &MomentSequence) -> Result<PathBuf> {
        let file = CacheFile {
            family: moments.family,
            two_alpha: moments.alpha.two_alpha(),
            support: moments.support.clone(),
            sha256: Some(checksum(&moments.values)),
            moments: moments.values.clone(),
        };
        let path = self.path_for(moments.family, moments.alpha);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &file)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }

    /// Moments `0..=n_max`, read from the cache when a long enough table is
    /// stored and computed (then stored) otherwise.
    pub fn moments(
        &self,
        family: MomentFamily,
        alpha: HalfIntegerAlpha,
        n_max: u32,
    ) -> Result<MomentSequence> {
        if let Some(cached) = self.load(family, alpha)? {
            if cached.order() >= n_max as usize {
                log::debug!("cache hit for {family} 2α={} N={n_max}", alpha.two_alpha());
                return cached.truncated(n_max as usize);
            }
        }
        log::info!("computing {family} moments for α={alpha} up to n={n_max}");
        let table = moment_table(family, alpha, n_max)?;
        self.store(&table)?;
        Ok(table)
    }

    fn json_files(&self) -> Result<Vec<PathBuf>> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        Ok(paths)
    }

    pub fn list(&self) -> Result<Vec<CacheEntry>> {
        self.json_files()?
            .into_iter()
            .map(|path| {
                let file = Self::read(&path)?;
                Ok(CacheEntry {
                    family: file.family,
                    alpha: HalfIntegerAlpha::new(file.two_alpha)?,
                    order: file.moments.len() - 1,
                    path,
                })
            })
            .collect()
    }

    /// Removes every cached table; returns how many files were deleted.
    pub fn clear(&self) -> Result<usize> {
        let files = self.json_files()?;
        for f in &files {
            fs::remove_file(f)?;
        }
        Ok(files.len())
    }

    /// Re-derives [`VERIFY_SAMPLES`] entries of every table (chosen by a
    /// generator seeded from the table's key) and checks the stored checksum.
    /// A checksum mismatch triggers a full re-derivation to locate the bad
    /// entry.
    pub fn verify(&self) -> Result<Vec<VerifyReport>> {
        self.json_files()?
            .into_iter()
            .map(|path| {
                let outcome = match Self::read(&path) {
                    Ok(file) => verify_file(&file)?,
                    Err(Error::CacheCorrupt { detail, .. }) => VerifyOutcome::Corrupt { detail },
                    Err(e) => return Err(e),
                };
                Ok(VerifyReport { path, outcome })
            })
            .collect()
    }
}

fn verify_file(file: &CacheFile) -> Result<VerifyOutcome> {
    let alpha = HalfIntegerAlpha::new(file.two_alpha)?;
    let mismatch =
        |n: usize| -> Result<bool> { Ok(moment(file.family, alpha, n as u32)? != file.moments[n]) };
    let len = file.moments.len();
    let key = ((file.family as u64) << 32) ^ ((file.two_alpha as u64) << 16) ^ len as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let mut checked: Vec<usize> = sample(&mut rng, len, VERIFY_SAMPLES.min(len)).into_vec();
    checked.sort_unstable();
    for &n in &checked {
        if mismatch(n)? {
            return Ok(VerifyOutcome::Corrupt {
                detail: format!("entry {n} differs from the exact value"),
            });
        }
    }
    if let Some(stored) = &file.sha256 {
        if *stored != checksum(&file.moments) {
            for n in 0..len {
                if mismatch(n)? {
                    return Ok(VerifyOutcome::Corrupt {
                        detail: format!("entry {n} differs from the exact value"),
                    });
                }
            }
            return Ok(VerifyOutcome::Corrupt {
                detail: "checksum mismatch".into(),
            });
        }
    }
    Ok(VerifyOutcome::Ok { checked })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit() -> HalfIntegerAlpha {
        HalfIntegerAlpha::QUBIT
    }

    #[test]
    fn missing_dir_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let gone = dir.path().join("nope");
        assert!(matches!(
            MomentCache::open(&gone),
            Err(Error::MissingCacheDir(_))
        ));
    }

    #[test]
    fn round_trip_and_prefix_reuse() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::open(dir.path()).unwrap();
        assert!(cache.list().unwrap().is_empty());
        let t = cache
            .moments(MomentFamily::Unbalanced, qubit(), 20)
            .unwrap();
        assert_eq!(t.values[1], ExactRational::frac(-7, 3876));
        let again = cache
            .moments(MomentFamily::Unbalanced, qubit(), 10)
            .unwrap();
        assert_eq!(again.values[..], t.values[..11]);
        let listed = cache.list().unwrap();
        assert_eq!(listed.len(), 1);
        assert_eq!(listed[0].order, 20);
        assert!(listed[0].path.ends_with("unbalanced-2.json"));

        let text = fs::read_to_string(&listed[0].path).unwrap();
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json["family"], "unbalanced");
        assert_eq!(json["twoAlpha"], 2);
        assert_eq!(json["support"][0], "-1/16");
        assert_eq!(json["moments"][1], "-7/3876");

        // a longer request recomputes and replaces the table
        cache
            .moments(MomentFamily::Unbalanced, qubit(), 30)
            .unwrap();
        assert_eq!(cache.list().unwrap()[0].order, 30);
        assert!(cache.verify().unwrap().iter().all(VerifyReport::is_ok));
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.list().unwrap().is_empty());
    }

    #[test]
    fn verify_names_tampered_entry() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::open(dir.path()).unwrap();
        cache.moments(MomentFamily::Balanced, qubit(), 12).unwrap();
        let path = cache.path_for(MomentFamily::Balanced, qubit());
        let mut json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let original = json["moments"][7].as_str().unwrap().to_string();
        let last = original.chars().last().unwrap();
        let flipped = if last == '1' { '3' } else { '1' };
        json["moments"][7] = format!("{}{}", &original[..original.len() - 1], flipped).into();
        fs::write(&path, json.to_string()).unwrap();
        let report = cache.verify().unwrap();
        assert_eq!(
            report[0].outcome,
            VerifyOutcome::Corrupt {
                detail: "entry 7 differs from the exact value".into()
            }
        );
    }

    #[test]
    fn unreadable_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MomentCache::open(dir.path()).unwrap();
        fs::write(dir.path().join("unbalanced-2.json"), "{\"family\": 3}").unwrap();
        assert!(!cache.verify().unwrap()[0].is_ok());
        assert!(matches!(cache.list(), Err(Error::CacheCorrupt { .. })));
        assert!(matches!(
            cache.load(MomentFamily::Unbalanced, qubit()),
            Err(Error::CacheCorrupt { .. })
        ));
    }
}
