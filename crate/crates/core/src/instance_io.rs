//! Portable instance files.
//!
//! Layout: one ASCII header line
//!
//! ```text
//! RSP1 m=<m> n=<n> F=<F> s=<s> mode=<gaussian|D=<D>> seed=<seed>\n
//! ```
//!
//! followed by little-endian `f64` payloads: `A` row-major (`m·n` values),
//! then `b` (`m`), then `x_true` (`n`). Numbers in the header use Rust's
//! shortest round-trip formatting, so identical parameters give
//! byte-identical files.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::problem::{InstanceMeta, ProblemInstance, ValueMode};

pub const MAGIC: &str = "RSP1";

pub fn header_line(inst: &ProblemInstance) -> String {
    format!(
        "{MAGIC} m={} n={} F={} s={} mode={} seed={}\n",
        inst.a.rows(),
        inst.a.cols(),
        inst.meta.coherence,
        inst.meta.sparsity,
        inst.meta.value_mode,
        inst.meta.seed
    )
}

pub fn write_instance<W: Write>(inst: &ProblemInstance, mut w: W) -> Result<()> {
    w.write_all(header_line(inst).as_bytes())?;
    let mut buf =
        Vec::with_capacity(8 * (inst.a.rows() * inst.a.cols() + inst.b.len() + inst.x_true.len()));
    for v in inst
        .a
        .to_row_major()
        .iter()
        .chain(inst.b.iter())
        .chain(inst.x_true.iter())
    {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn save_instance(inst: &ProblemInstance, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_instance(inst, std::io::BufWriter::new(f))
}

fn field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    let tok = tok.ok_or_else(|| Error::Format(format!("missing header field '{key}'")))?;
    tok.strip_prefix(key)
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::Format(format!("expected '{key}=...', found '{tok}'")))
}

fn parse<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Format(format!("bad value '{s}' for '{key}'")))
}

pub fn read_instance<R: Read>(r: R) -> Result<ProblemInstance> {
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let header = header
        .strip_suffix('\n')
        .ok_or_else(|| Error::Format("unterminated header".into()))?;
    let mut toks = header.split(' ');
    if toks.next() != Some(MAGIC) {
        return Err(Error::Format("missing RSP1 magic".into()));
    }
    let m: usize = parse(field(toks.next(), "m")?, "m")?;
    let n: usize = parse(field(toks.next(), "n")?, "n")?;
    let coherence: f64 = parse(field(toks.next(), "F")?, "F")?;
    let sparsity: usize = parse(field(toks.next(), "s")?, "s")?;
    let mode_tok = toks
        .next()
        .ok_or_else(|| Error::Format("missing header field 'mode'".into()))?;
    let mode_str = mode_tok
        .strip_prefix("mode=")
        .ok_or_else(|| Error::Format(format!("expected 'mode=...', found '{mode_tok}'")))?;
    let value_mode: ValueMode = mode_str
        .parse()
        .map_err(|_| Error::Format(format!("bad mode '{mode_str}'")))?;
    let seed: u64 = parse(field(toks.next(), "seed")?, "seed")?;
    if toks.next().is_some() {
        return Err(Error::Format("trailing header fields".into()));
    }

    let total = m
        .checked_mul(n)
        .and_then(|mn| mn.checked_add(m + n))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * total {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            8 * total,
            bytes.len()
        )));
    }
    let vals: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let a = DenseMatrix::from_row_major(m, n, &vals[..m * n])?;
    let b = DVector::from_column_slice(&vals[m * n..m * n + m]);
    let x_true = DVector::from_column_slice(&vals[m * n + m..]);
    Ok(ProblemInstance {
        a,
        b,
        x_true,
        meta: InstanceMeta {
            coherence,
            sparsity,
            value_mode,
            seed,
        },
    })
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    read_instance(std::fs::File::open(path)?)
}

/// `index,value` rows (0-based index), header included.
pub fn write_vector_csv<W: Write>(x: &DVector<f64>, mut w: W) -> Result<()> {
    writeln!(w, "index,value")?;
    for (i, v) in x.iter().enumerate() {
        writeln!(w, "{i},{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::gen_instance;

    #[test]
    fn round_trip_and_header() {
        let inst = gen_instance(4, 12, 2, 1.5, ValueMode::DynamicRange(3.0), 9).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        assert!(buf.starts_with(b"RSP1 m=4 n=12 F=1.5 s=2 mode=D=3 seed=9\n"));
        assert_eq!(read_instance(&buf[..]).unwrap(), inst);
    }

    #[test]
    fn rejects_truncated_payload() {
        let inst = gen_instance(4, 12, 2, 1.0, ValueMode::Gaussian, 1).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_instance(&buf[..]), Err(Error::Format(_))));
        assert!(matches!(
            read_instance(&b"RSP2 m=1\n"[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn csv_export() {
        let mut out = Vec::new();
        write_vector_csv(&DVector::from_column_slice(&[0.0, 2.5]), &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "index,value\n0,0e0\n1,2.5e0\n"
        );
    }
}
