//! VGRID volume files: a `key = value` text header (`.vgh`) next to a dense
//! little-endian raw dump in x-fastest order.
//!
//! ```text
//! dims = 96 96 16
//! spacing_mm = 0.5 0.5 3
//! dtype = u8
//! order = xyz
//! byteorder = little
//! data = mask.raw
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kv;
use crate::volume::{
    Dtype, GridMeta, IntensityVolume, LabelVolume, MaskVolume, ProbVolume, Volume, Voxel,
};

pub const HEADER_EXTENSION: &str = "vgh";
pub const RAW_EXTENSION: &str = "raw";

const REQUIRED_KEYS: [&str; 6] = ["dims", "spacing_mm", "dtype", "order", "byteorder", "data"];

/// A volume of any supported element type, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyVolume {
    Label(LabelVolume),
    Mask(MaskVolume),
    Intensity(IntensityVolume),
    Prob(ProbVolume),
}

impl AnyVolume {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyVolume::Label(_) => <crate::volume::ClassId as Voxel>::KIND,
            AnyVolume::Mask(_) => <bool as Voxel>::KIND,
            AnyVolume::Intensity(_) => <f32 as Voxel>::KIND,
            AnyVolume::Prob(_) => <[f32; 3] as Voxel>::KIND,
        }
    }

    pub fn meta(&self) -> &GridMeta {
        match self {
            AnyVolume::Label(v) => v.meta(),
            AnyVolume::Mask(v) => v.meta(),
            AnyVolume::Intensity(v) => v.meta(),
            AnyVolume::Prob(v) => v.meta(),
        }
    }

    pub fn write(&self, header_path: impl AsRef<Path>) -> Result<()> {
        match self {
            AnyVolume::Label(v) => write_volume(v, header_path),
            AnyVolume::Mask(v) => write_volume(v, header_path),
            AnyVolume::Intensity(v) => write_volume(v, header_path),
            AnyVolume::Prob(v) => write_volume(v, header_path),
        }
    }
}

struct Header {
    meta: GridMeta,
    dtype: Dtype,
    data: PathBuf,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_header(path: &Path) -> Result<Header> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs = kv::parse(&text).map_err(|r| malformed(path, r))?;
    let get = |key: &str| {
        pairs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| malformed(path, format!("missing key '{key}'")))
    };
    if let Some((k, _)) = pairs.iter().find(|(k, _)| !REQUIRED_KEYS.contains(&k.as_str())) {
        return Err(malformed(path, format!("unknown key '{k}'")));
    }

    let dims: Vec<usize> = get("dims")?
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| malformed(path, "dims must be three positive integers"))?;
    let spacing = kv::split_f64(get("spacing_mm")?).map_err(|r| malformed(path, r))?;
    let (dims, spacing): ([usize; 3], [f64; 3]) = match (dims.try_into(), spacing.try_into()) {
        (Ok(d), Ok(s)) => (d, s),
        _ => return Err(malformed(path, "dims and spacing_mm need three values each")),
    };
    let meta = GridMeta::new(dims, spacing).map_err(|e| malformed(path, e.to_string()))?;

    let dtype = get("dtype")?;
    let dtype = Dtype::parse(dtype).ok_or_else(|| malformed(path, format!("bad dtype '{dtype}'")))?;
    if get("order")? != "xyz" {
        return Err(malformed(path, "order must be xyz"));
    }
    if get("byteorder")? != "little" {
        return Err(malformed(path, "byteorder must be little"));
    }
    let data = get("data")?;
    if data.is_empty() {
        return Err(malformed(path, "empty data path"));
    }
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    Ok(Header {
        meta,
        dtype,
        data: dir.join(data),
    })
}

fn decode<T: Voxel>(meta: GridMeta, bytes: &[u8]) -> Result<Volume<T>> {
    let size = T::DTYPE.element_size();
    let expected = meta.len() * size;
    if bytes.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes
        .chunks_exact(size)
        .enumerate()
        .map(|(i, chunk)| T::decode(chunk, i))
        .collect::<Result<Vec<T>>>()?;
    Ok(Volume::from_parts_unchecked(meta, data))
}

/// Reads a header and its raw file, dispatching on the declared dtype.
pub fn read_volume(header_path: impl AsRef<Path>) -> Result<AnyVolume> {
    let path = header_path.as_ref();
    let header = parse_header(path)?;
    let bytes = fs::read(&header.data).map_err(|e| Error::io(&header.data, e))?;
    Ok(match header.dtype {
        Dtype::U8 => AnyVolume::Label(decode(header.meta, &bytes)?),
        Dtype::Bool8 => AnyVolume::Mask(decode(header.meta, &bytes)?),
        Dtype::F32 => AnyVolume::Intensity(decode(header.meta, &bytes)?),
        Dtype::F32x3 => AnyVolume::Prob(decode(header.meta, &bytes)?),
    })
}

/// Reads a volume and checks that it has the element type `T`.
pub fn read_typed<T: Voxel>(header_path: impl AsRef<Path>) -> Result<Volume<T>> {
    let path = header_path.as_ref();
    let header = parse_header(path)?;
    if header.dtype != T::DTYPE {
        return Err(Error::KindMismatch {
            expected: T::DTYPE.name(),
            found: header.dtype.name(),
        });
    }
    let bytes = fs::read(&header.data).map_err(|e| Error::io(&header.data, e))?;
    decode(header.meta, &bytes)
}

pub fn encode<T: Voxel>(volume: &Volume<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(volume.len() * T::DTYPE.element_size());
    for v in volume.data() {
        v.encode(&mut out);
    }
    out
}

/// Path of the raw file paired with `header_path`.
pub fn raw_path(header_path: &Path) -> PathBuf {
    header_path.with_extension(RAW_EXTENSION)
}

/// Writes `<stem>.vgh` and `<stem>.raw` next to each other.
pub fn write_volume<T: Voxel>(volume: &Volume<T>, header_path: impl AsRef<Path>) -> Result<()> {
    let header_path = header_path.as_ref();
    let raw = raw_path(header_path);
    let raw_name = raw
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| malformed(header_path, "header path has no usable file name"))?
        .to_string();
    let meta = volume.meta();
    let [nx, ny, nz] = meta.dims();
    let header = kv::render([
        ("dims", format!("{nx} {ny} {nz}")),
        ("spacing_mm", kv::join_f64(&meta.spacing())),
        ("dtype", T::DTYPE.name().to_string()),
        ("order", "xyz".to_string()),
        ("byteorder", "little".to_string()),
        ("data", raw_name),
    ]);
    fs::write(&raw, encode(volume)).map_err(|e| Error::io(&raw, e))?;
    fs::write(header_path, header).map_err(|e| Error::io(header_path, e))?;
    Ok(())
}
