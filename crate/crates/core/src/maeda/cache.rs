//! On-disk cache of coefficient tables.
//!
//! ```text
//! HECKELAB-CACHE v1
//! kind=<tau|delta_pow> i=<i> N=<N> mod=<M|0>
//! crc32=<8 lowercase hex digits of the payload>
//! <coefficient 0>
//! ...
//! <coefficient N-1>
//! ```
//!
//! The payload is everything after the third line: one decimal integer per
//! line, LF-terminated. Writes go to a temporary file in the same directory
//! followed by a rename, so readers never observe a partial table.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use thiserror::Error;

use crate::qseries::{CoeffRing, Coefficients, QSeries, QSeriesError};

pub const CACHE_MAGIC: &str = "HECKELAB-CACHE";
pub const CACHE_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("cache I/O error at {path}: {message}")]
    Io { path: String, message: String },
    #[error("unsupported cache header {found:?}, expected \"{CACHE_MAGIC} {CACHE_VERSION}\"")]
    VersionMismatch { found: String },
    #[error("malformed cache line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("checksum mismatch: header says {expected}, payload hashes to {found}")]
    Checksum { expected: String, found: String },
    #[error("cache file holds {found}, requested {expected}")]
    KeyMismatch { expected: CacheKey, found: CacheKey },
    #[error("table has {found} coefficients, key says N = {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Series(#[from] QSeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CacheKind {
    Tau,
    DeltaPow,
}

impl CacheKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheKind::Tau => "tau",
            CacheKind::DeltaPow => "delta_pow",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "tau" => Some(CacheKind::Tau),
            "delta_pow" => Some(CacheKind::DeltaPow),
            _ => None,
        }
    }
}

/// Identifies a table: Δ^i to precision N over ℤ (`modulus` 0) or ℤ/M.
/// Tau tables are Δ¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub kind: CacheKind,
    pub i: u32,
    pub precision: usize,
    pub modulus: u64,
}

impl CacheKey {
    pub fn tau(precision: usize, modulus: u64) -> Self {
        Self {
            kind: CacheKind::Tau,
            i: 1,
            precision,
            modulus,
        }
    }

    pub fn delta_pow(i: u32, precision: usize, modulus: u64) -> Self {
        Self {
            kind: CacheKind::DeltaPow,
            i,
            precision,
            modulus,
        }
    }

    pub fn ring(&self) -> Result<CoeffRing, QSeriesError> {
        match self.modulus {
            0 => Ok(CoeffRing::BigInt),
            m => CoeffRing::modulo(m),
        }
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}-i{}-N{}-mod{}.txt",
            self.kind.as_str(),
            self.i,
            self.precision,
            self.modulus
        )
    }
}

impl fmt::Display for CacheKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} i={} N={} mod={}",
            self.kind.as_str(),
            self.i,
            self.precision,
            self.modulus
        )
    }
}

fn parse_key(line: &str) -> Option<CacheKey> {
    let mut fields = line.split(' ');
    let mut next = |name: &str| {
        fields
            .next()?
            .strip_prefix(name)?
            .strip_prefix('=')
            .map(str::to_string)
    };
    let kind = CacheKind::parse(&next("kind")?)?;
    let i = next("i")?.parse().ok()?;
    let precision = next("N")?.parse().ok()?;
    let modulus = next("mod")?.parse().ok()?;
    if fields.next().is_some() {
        return None;
    }
    Some(CacheKey {
        kind,
        i,
        precision,
        modulus,
    })
}

/// Serializes a table in the cache format.
pub fn encode(key: &CacheKey, coeffs: &[BigInt]) -> String {
    let mut payload = String::new();
    for c in coeffs {
        payload.push_str(&c.to_string());
        payload.push('\n');
    }
    let crc = crc32fast::hash(payload.as_bytes());
    format!("{CACHE_MAGIC} {CACHE_VERSION}\n{key}\ncrc32={crc:08x}\n{payload}")
}

/// Parses and validates a cache file.
pub fn decode(text: &str) -> Result<(CacheKey, Vec<BigInt>), CacheError> {
    let malformed = |line: usize, reason: &str| CacheError::Malformed {
        line,
        reason: reason.to_string(),
    };
    let mut rest = text;
    let mut header = Vec::with_capacity(3);
    for line in 1..=3 {
        let (head, tail) = rest
            .split_once('\n')
            .ok_or_else(|| malformed(line, "missing header line"))?;
        header.push(head);
        rest = tail;
    }
    if header[0] != format!("{CACHE_MAGIC} {CACHE_VERSION}") {
        return Err(CacheError::VersionMismatch {
            found: header[0].to_string(),
        });
    }
    let key =
        parse_key(header[1]).ok_or_else(|| malformed(2, "expected kind=.. i=.. N=.. mod=.."))?;
    let expected = header[2]
        .strip_prefix("crc32=")
        .ok_or_else(|| malformed(3, "expected crc32=<hex>"))?;
    let found = format!("{:08x}", crc32fast::hash(rest.as_bytes()));
    if expected != found {
        return Err(CacheError::Checksum {
            expected: expected.to_string(),
            found,
        });
    }
    let coeffs = rest
        .lines()
        .enumerate()
        .map(|(k, l)| {
            l.parse::<BigInt>()
                .map_err(|_| malformed(k + 4, "not a decimal integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != key.precision {
        return Err(malformed(
            4 + coeffs.len(),
            "coefficient count differs from N",
        ));
    }
    Ok((key, coeffs))
}

/// A cache directory with a hit counter.
#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    hits: AtomicU64,
    temp_counter: AtomicU64,
}

fn io_error(path: &Path, e: io::Error) -> CacheError {
    CacheError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

impl Cache {
    /// Opens `dir`, creating it if needed.
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Self {
            dir,
            hits: AtomicU64::new(0),
            temp_counter: AtomicU64::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Number of successful loads so far.
    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn store(&self, key: &CacheKey, coeffs: &[BigInt]) -> Result<PathBuf, CacheError> {
        if coeffs.len() != key.precision {
            return Err(CacheError::LengthMismatch {
                expected: key.precision,
                found: coeffs.len(),
            });
        }
        let path = self.path(key);
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            key.file_name(),
            std::process::id(),
            self.temp_counter.fetch_add(1, Ordering::Relaxed)
        ));
        let write = || -> io::Result<()> {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(encode(key, coeffs).as_bytes())?;
            file.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| {
            let _ = fs::remove_file(&tmp);
            io_error(&path, e)
        })?;
        Ok(path)
    }

    /// The table for `key`, or `None` when no file exists.
    pub fn load(&self, key: &CacheKey) -> Result<Option<Vec<BigInt>>, CacheError> {
        let path = self.path(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_error(&path, e)),
        };
        let (found, coeffs) = decode(&text)?;
        if found != *key {
            return Err(CacheError::KeyMismatch {
                expected: *key,
                found,
            });
        }
        self.hits.fetch_add(1, Ordering::Relaxed);
        Ok(Some(coeffs))
    }

    pub fn store_series(&self, key: &CacheKey, series: &QSeries) -> Result<PathBuf, CacheError> {
        let coeffs: Vec<BigInt> = match series.coefficients() {
            Coefficients::Int(v) => v.clone(),
            Coefficients::Mod { values, .. } => values.iter().map(|&x| BigInt::from(x)).collect(),
            Coefficients::Rat(_) => return Err(QSeriesError::NotIntegral(series.ring()).into()),
        };
        self.store(key, &coeffs)
    }

    pub fn load_series(&self, key: &CacheKey) -> Result<Option<QSeries>, CacheError> {
        let Some(coeffs) = self.load(key)? else {
            return Ok(None);
        };
        let series = match key.ring()? {
            CoeffRing::ModM(m) => {
                let residues = coeffs
                    .iter()
                    .map(|c| u64::try_from(c).ok().filter(|&r| r < m))
                    .collect::<Option<Vec<u64>>>()
                    .ok_or_else(|| CacheError::Malformed {
                        line: 4,
                        reason: format!("residue outside 0..{m}"),
                    })?;
                QSeries::from_residues(m, residues)?
            }
            _ => QSeries::from_ints(coeffs)?,
        };
        Ok(Some(series))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::{delta_in, delta_power};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn format_is_exact() {
        let key = CacheKey::tau(3, 0);
        let text = encode(&key, &ints(&[0, 1, -24]));
        let payload = "0\n1\n-24\n";
        let crc = format!("{:08x}", crc32fast::hash(payload.as_bytes()));
        assert_eq!(
            text,
            format!("HECKELAB-CACHE v1\nkind=tau i=1 N=3 mod=0\ncrc32={crc}\n{payload}")
        );
        assert_eq!(decode(&text).unwrap(), (key, ints(&[0, 1, -24])));
    }

    #[test]
    fn tau_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("nested")).unwrap();
        let key = CacheKey::tau(101, 0);
        assert_eq!(cache.load(&key).unwrap(), None);
        let delta = delta_in(101, CoeffRing::BigInt).unwrap();
        let path = cache.store_series(&key, delta.series()).unwrap();
        let bytes = fs::read(&path).unwrap();
        let loaded = cache.load_series(&key).unwrap().unwrap();
        assert_eq!(&loaded, delta.series());
        assert_eq!(cache.hits(), 1);
        cache.store_series(&key, &loaded).unwrap();
        assert_eq!(fs::read(&path).unwrap(), bytes);
        let leftovers: Vec<_> = fs::read_dir(cache.dir())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn delta_square_mod3_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let ring = CoeffRing::ModM(3);
        let key = CacheKey::delta_pow(2, 510, 3);
        cache
            .store_series(&key, delta_power(2, 510, ring).unwrap().series())
            .unwrap();
        let loaded = cache.load_series(&key).unwrap().unwrap();
        let recomputed = delta_in(510, ring).unwrap().series().pow(2).unwrap();
        assert_eq!(loaded, recomputed);
    }

    #[test]
    fn corruption_is_detected() {
        let key = CacheKey::tau(5, 0);
        let text = encode(&key, &ints(&[0, 1, -24, 252, -1472]));
        let truncated = &text[..text.len() - 3];
        assert!(matches!(
            decode(truncated),
            Err(CacheError::Checksum { .. })
        ));
        let flipped = text.replace("252", "253");
        assert!(matches!(decode(&flipped), Err(CacheError::Checksum { .. })));
        let v2 = text.replacen("v1", "v2", 1);
        assert!(matches!(
            decode(&v2),
            Err(CacheError::VersionMismatch { .. })
        ));
        assert!(matches!(
            decode("HECKELAB-CACHE v1\n"),
            Err(CacheError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn wrong_key_and_bad_residue() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let key = CacheKey::delta_pow(1, 2, 3);
        let other = CacheKey::delta_pow(1, 2, 5);
        fs::write(cache.path(&other), encode(&key, &ints(&[0, 1]))).unwrap();
        assert!(matches!(
            cache.load(&other),
            Err(CacheError::KeyMismatch { .. })
        ));
        fs::write(cache.path(&key), encode(&key, &ints(&[0, 7]))).unwrap();
        assert!(matches!(
            cache.store(&key, &ints(&[0])),
            Err(CacheError::LengthMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            cache.load_series(&key),
            Err(CacheError::Malformed { .. })
        ));
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(v in proptest::collection::vec(any::<i64>(), 1..40), i in 1u32..50, m in 0u64..100) {
            let key = CacheKey::delta_pow(i, v.len(), m);
            let coeffs = ints(&v);
            prop_assert_eq!(decode(&encode(&key, &coeffs)).unwrap(), (key, coeffs));
        }
    }
}
