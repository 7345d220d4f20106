//! Binary dumps. All integers are little-endian `u64`, all reals
//! little-endian `f64`.
//!
//! Fock basis: magic `B2DFOCK1`, then `N`, `d`, `dim`, then `dim` rows of
//! `d` occupation bytes in enumeration order.
//!
//! Two-body tensor: magic `B2DTENS1`, then `d`, then `d⁴` entries
//! `(re, im)` with index `((i·d + j)·d + k)·d + l`.

use std::io::{Read, Write};

use super::fock::FockBasis;
use super::tensor::TwoBodyTensor;
use crate::error::{Error, Result};
use crate::C64;

const FOCK_MAGIC: &[u8; 8] = b"B2DFOCK1";
const TENSOR_MAGIC: &[u8; 8] = b"B2DTENS1";

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<()> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&b))));
    }
    Ok(())
}

pub fn write_fock<W: Write>(fock: &FockBasis, mut out: W) -> Result<()> {
    out.write_all(FOCK_MAGIC)?;
    for v in [fock.particles(), fock.modes(), fock.len()] {
        out.write_all(&(v as u64).to_le_bytes())?;
    }
    for s in fock.states() {
        out.write_all(s)?;
    }
    Ok(())
}

pub fn read_fock<R: Read>(mut input: R) -> Result<FockBasis> {
    expect_magic(&mut input, FOCK_MAGIC)?;
    let n = read_u64(&mut input)? as usize;
    let d = read_u64(&mut input)? as usize;
    let dim = read_u64(&mut input)? as usize;
    let fock = FockBasis::new(n, d, dim)?;
    if fock.len() != dim {
        return Err(Error::Format(format!("header dimension {dim} inconsistent with N = {n}, d = {d}")));
    }
    let mut row = vec![0u8; d];
    for s in fock.states() {
        input.read_exact(&mut row)?;
        if row != *s {
            return Err(Error::Format("occupation rows out of enumeration order".into()));
        }
    }
    Ok(fock)
}

pub fn write_tensor<W: Write>(w: &TwoBodyTensor, mut out: W) -> Result<()> {
    out.write_all(TENSOR_MAGIC)?;
    out.write_all(&(w.dim() as u64).to_le_bytes())?;
    for z in w.data() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(mut input: R) -> Result<TwoBodyTensor> {
    expect_magic(&mut input, TENSOR_MAGIC)?;
    let d = read_u64(&mut input)? as usize;
    if d > 256 {
        return Err(Error::Format(format!("implausible tensor rank {d}")));
    }
    let mut data = Vec::with_capacity(d.pow(4));
    for _ in 0..d.pow(4) {
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        data.push(C64::new(re, im));
    }
    let mut it = data.into_iter();
    Ok(TwoBodyTensor::from_fn(d, |_, _, _, _| it.next().expect("sized")))
}
