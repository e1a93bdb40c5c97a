//! CSV serialization of SDMs.
//!
//! Layout: a header line `# sdm n=<n> r=<r> family=<family>`, then one row
//! per matrix row with every entry written as a `re,im` pair.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::basis::Family;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::sdm::Sdm;

/// Basis parameters recorded in an SDM file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SdmHeader {
    pub n: usize,
    pub r: i32,
    pub family: Family,
}

pub fn write_sdm_csv(path: &Path, s: &Sdm, header: SdmHeader) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# sdm n={} r={} family={}", header.n, header.r, header.family)?;
    let m = s.matrix();
    for j in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|k| format!("{:e},{:e}", m[(j, k)].re, m[(j, k)].im))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<SdmHeader> {
    let rest = line
        .trim()
        .strip_prefix("# sdm")
        .ok_or_else(|| Error::Parse(format!("missing sdm header, got `{line}`")))?;
    let (mut n, mut r, mut family) = (None, None, None);
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token `{token}`")))?;
        let bad = |e: String| Error::Parse(format!("header `{key}`: {e}"));
        match key {
            "n" => n = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
            "r" => r = Some(value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?),
            "family" => family = Some(value.parse::<Family>()?),
            _ => {}
        }
    }
    match (n, r, family) {
        (Some(n), Some(r), Some(family)) => Ok(SdmHeader { n, r, family }),
        _ => Err(Error::Parse(format!("incomplete sdm header `{line}`"))),
    }
}

/// Reads and validates an SDM file.
pub fn read_sdm_csv(path: &Path) -> Result<(Sdm, SdmHeader)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = parse_header(lines.next().ok_or_else(|| Error::Parse("empty sdm file".into()))?)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for line in lines {
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Parse(format!("`{c}`: {e}"))))
            .collect::<Result<_>>()?;
        if cells.len() % 2 != 0 {
            return Err(Error::Parse("odd number of fields in sdm row".into()));
        }
        rows.push(cells.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect());
    }
    let size = rows.len();
    if rows.iter().any(|r| r.len() != size) {
        return Err(Error::Parse("sdm matrix is not square".into()));
    }
    let m = CMatrix::from_fn(size, size, |j, k| rows[j][k]);
    Ok((Sdm::new(m)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_sdm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = random_sdm(9, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let header = SdmHeader {
            n: 2,
            r: 1,
            family: Family::Fourier,
        };
        write_sdm_csv(&path, &s, header).unwrap();
        let (t, h) = read_sdm_csv(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(t.matrix(), s.matrix());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# sdm n=2 r=1 family=fourier\n"));
    }

    #[test]
    fn malformed_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,0\n").unwrap();
        assert!(read_sdm_csv(&path).is_err());
        std::fs::write(&path, "# sdm n=1 r=1 family=fourier\n1,0,0,0\n").unwrap();
        assert!(read_sdm_csv(&path).is_err());
    }
}
