//! Checkpoint format: a small binary container holding an ordered list of
//! named tensors (little-endian f32) preceded by string key/value manifest
//! entries. Writes go to a temp file and are renamed into place so a crash
//! never leaves a partial checkpoint behind.

use std::collections::BTreeMap;
use std::io::{self, Read};
use std::path::Path;

use super::params::ParamStore;
use super::tensor::{Scalar, Shape, Tensor};

const MAGIC: &[u8; 4] = b"RNCK";
const VERSION: u32 = 1;

pub fn save<T: Scalar>(
    path: &Path,
    store: &ParamStore<T>,
    manifest: &BTreeMap<String, String>,
) -> io::Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());

    buf.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    for (k, v) in manifest {
        write_str(&mut buf, k);
        write_str(&mut buf, v);
    }

    buf.extend_from_slice(&(store.len() as u32).to_le_bytes());
    for (_, p) in store.iter() {
        write_str(&mut buf, &p.name);
        let dims = p.value.shape().dims();
        buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
        for d in dims {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in p.value.data() {
            buf.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes());
        }
    }

    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &buf)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub struct Checkpoint {
    pub manifest: BTreeMap<String, String>,
    pub tensors: Vec<(String, Tensor<f32>)>,
}

pub fn load(path: &Path) -> io::Result<Checkpoint> {
    let bytes = std::fs::read(path)?;
    let mut r = io::Cursor::new(bytes);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(bad(&format!("unsupported checkpoint version {version}")));
    }

    let mut manifest = BTreeMap::new();
    for _ in 0..read_u32(&mut r)? {
        let k = read_str(&mut r)?;
        let v = read_str(&mut r)?;
        manifest.insert(k, v);
    }

    let mut tensors = Vec::new();
    for _ in 0..read_u32(&mut r)? {
        let name = read_str(&mut r)?;
        let ndims = read_u32(&mut r)? as usize;
        let mut dims = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            dims.push(read_u32(&mut r)? as usize);
        }
        let shape = match dims.as_slice() {
            [n] => Shape::Vector(*n),
            [rows, cols] => Shape::Matrix(*rows, *cols),
            other => return Err(bad(&format!("unsupported tensor rank {}", other.len()))),
        };
        let mut data = Vec::with_capacity(shape.len());
        let mut quad = [0u8; 4];
        for _ in 0..shape.len() {
            r.read_exact(&mut quad)?;
            data.push(f32::from_le_bytes(quad));
        }
        tensors.push((name, Tensor::new(shape, data)));
    }
    Ok(Checkpoint { manifest, tensors })
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut quad = [0u8; 4];
    r.read_exact(&mut quad)?;
    Ok(u32::from_le_bytes(quad))
}

fn read_str<R: Read>(r: &mut R) -> io::Result<String> {
    let len = read_u32(r)? as usize;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|_| bad("manifest entry is not UTF-8"))
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}
