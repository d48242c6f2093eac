//! Binary dump of a [`DisorderRealization`] for replaying failing replicas.
//!
//! Layout, all integers and doubles little-endian:
//!
//! ```text
//! magic    4 bytes  "SPFD"
//! version  u32      1
//! n        u32
//! terms    u32      number of (p, alpha_p) pairs that follow
//! (p u32, alpha_p f64) * terms
//! seed     u64
//! goe      f64 * n(n+1)/2     row-major upper triangle
//! tensors  f64 * n^p          one block per p >= 3 in the mixture, ascending
//! ```

use std::io::{Read, Write};

use super::{CouplingTensor, DisorderRealization, GoeMatrix};
use crate::error::{Error, Result};
use crate::theory::{Mixture, MAX_P};

pub const DUMP_MAGIC: [u8; 4] = *b"SPFD";
pub const DUMP_VERSION: u32 = 1;

pub fn write_disorder<W: Write>(d: &DisorderRealization, mut w: W) -> Result<()> {
    w.write_all(&DUMP_MAGIC)?;
    w.write_all(&DUMP_VERSION.to_le_bytes())?;
    w.write_all(&(d.n() as u32).to_le_bytes())?;
    let terms: Vec<(usize, f64)> = d.mixture().terms().collect();
    w.write_all(&(terms.len() as u32).to_le_bytes())?;
    for (p, a) in terms {
        w.write_all(&(p as u32).to_le_bytes())?;
        w.write_all(&a.to_le_bytes())?;
    }
    w.write_all(&d.seed().to_le_bytes())?;
    for v in d.goe().upper() {
        w.write_all(&v.to_le_bytes())?;
    }
    for t in d.tensors() {
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_disorder<R: Read>(mut r: R) -> Result<DisorderRealization> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != DUMP_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != DUMP_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    if count > MAX_P {
        return Err(Error::Format(format!("{count} mixture terms")));
    }
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let p = read_u32(&mut r)? as usize;
        let a = read_f64s(&mut r, 1)?[0];
        terms.push((p, a));
    }
    let mixture = Mixture::new(terms)?;
    let seed = read_u64(&mut r)?;
    let goe = GoeMatrix::from_upper(n, read_f64s(&mut r, n * (n + 1) / 2)?)?;
    let mut tensors = Vec::new();
    for (p, _) in mixture.higher_orders() {
        let data = read_f64s(&mut r, n.pow(p as u32))?;
        tensors.push(CouplingTensor::new(p, n, data)?);
    }
    DisorderRealization::from_parts(mixture, goe, tensors, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let mix = Mixture::new([(2, 1.0), (3, 0.25), (4, 0.5)]).unwrap();
        let d = DisorderRealization::sample(&mix, 5, 0xDEAD_BEEF);
        let mut buf = Vec::new();
        write_disorder(&d, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"SPFD");
        assert_eq!(buf.len(), 4 + 4 + 4 + 4 + 3 * 12 + 8 + 8 * (15 + 125 + 625));
        let back = read_disorder(buf.as_slice()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_corrupt_headers() {
        let d = DisorderRealization::sample(&Mixture::sk(), 3, 1);
        let mut buf = Vec::new();
        write_disorder(&d, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_disorder(bad.as_slice()), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(matches!(read_disorder(bad.as_slice()), Err(Error::Format(_))));
        assert!(read_disorder(&buf[..buf.len() - 1]).is_err());
    }
}
