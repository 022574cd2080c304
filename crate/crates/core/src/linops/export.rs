use std::io::{BufRead, Write};

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{BlockKind, BlockOperatorMatrix, Sector};
use crate::error::{invalid, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    kind: BlockKind,
    ell: usize,
    m: i64,
    nu: f64,
    size: usize,
    n: usize,
}

/// Writes a JSON header line followed by the row-major entries as
/// little-endian `f64`.
pub fn write_matrix<W: Write>(block: &BlockOperatorMatrix, mut out: W) -> Result<()> {
    let header = Header {
        kind: block.sector.kind,
        ell: block.sector.ell,
        m: block.sector.m,
        nu: block.sector.nu,
        size: block.size(),
        n: block.n,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    let size = block.size();
    let mut buf = Vec::with_capacity(size * 8);
    for i in 0..size {
        buf.clear();
        for j in 0..size {
            buf.extend_from_slice(&block.entries[(i, j)].to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Inverse of [`write_matrix`].
pub fn read_matrix<R: BufRead>(mut input: R) -> Result<BlockOperatorMatrix> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())?;
    let size = header.size;
    let mut bytes = vec![0u8; size * size * 8];
    input.read_exact(&mut bytes)?;
    if header.n == 0 || size % header.n != 0 {
        return Err(invalid("matrix header has inconsistent sizes"));
    }
    let entries = Mat::<f64>::from_fn(size, size, |i, j| {
        let k = (i * size + j) * 8;
        f64::from_le_bytes(bytes[k..k + 8].try_into().expect("eight bytes"))
    });
    Ok(BlockOperatorMatrix {
        sector: Sector { kind: header.kind, ell: header.ell, m: header.m, nu: header.nu },
        n: header.n,
        entries,
        asymmetry: None,
    })
}
