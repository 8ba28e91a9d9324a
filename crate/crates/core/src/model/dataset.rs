//! Binary dataset container: magic `SPTD`, u32 version, u64 n, u64 p, then
//! X row-major, Y and θ* as little-endian f64, then the u64 seed.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use super::sample::RegressionSample;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SPTD";
const VERSION: u32 = 1;

pub fn write_dataset<W: Write>(mut w: W, sample: &RegressionSample) -> Result<()> {
    let (n, p) = (sample.n(), sample.p());
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&(p as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * (n * p + n + p) + 8);
    for i in 0..n {
        for j in 0..p {
            buf.extend_from_slice(&sample.x[(i, j)].to_le_bytes());
        }
    }
    for v in sample.y.iter().chain(sample.theta_star.iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&sample.seed.to_le_bytes());
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dataset<R: Read>(mut r: R) -> Result<RegressionSample> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidConfig("not an SPTD dataset".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::InvalidConfig(format!("unsupported dataset version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let p = read_u64(&mut r)? as usize;
    let mut read_vec = |len: usize| -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; 8 * len];
        r.read_exact(&mut bytes)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let x = DMatrix::from_row_slice(n, p, &read_vec(n * p)?);
    let y = DVector::from_vec(read_vec(n)?);
    let theta_star = DVector::from_vec(read_vec(p)?);
    let seed = read_u64(&mut r)?;
    Ok(RegressionSample { x, y, theta_star, seed })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_layout() {
        let sample = RegressionSample {
            x: DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
            y: DVector::from_vec(vec![-1.0, 0.5]),
            theta_star: DVector::from_vec(vec![0.0, 1.0, 0.0]),
            seed: 99,
        };
        let mut bytes = Vec::new();
        write_dataset(&mut bytes, &sample).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 * (6 + 2 + 3) + 8);
        assert_eq!(&bytes[..4], b"SPTD");
        // second stored value of X is row 0, column 1
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 2.0);
        assert_eq!(read_dataset(&bytes[..]).unwrap(), sample);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_dataset(&bad[..]).is_err());
    }
}
