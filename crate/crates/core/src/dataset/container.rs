//! SCAT1 binary container.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "SCAT" | u32 version = 1 | u32 family | u32 n_samples | u32 n_inc | u32 n_rec | u32 n
//! f64 k | f64 r_meas | f64 aperture_start | f64 aperture_end | f64 delta_train | f64 scale_c
//! u32 flags (bit 0 clean fields, bit 1 noisy fields, bit 2 tensors)
//! per sample:
//!   u64 sample_id | u64 seed | n*n f64 eps
//!   [bit 0] n_inc*n_rec (f64 re, f64 im) clean scattered field
//!   [bit 1] n_inc*n_rec (f64 re, f64 im) noisy scattered field
//!   [bit 2] n_inc*n*n f64 index tensor
//! u64 FNV-1a hash of every preceding byte
//! ```

use std::fs::File;
use std::hash::Hasher;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use fnv::FnvHasher;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsm::IndexTensor;
use crate::error::{Error, Result};
use crate::forward::{Aperture, ExperimentConfig, FieldRecord};
use crate::scene::ContrastGrid;

pub const MAGIC: [u8; 4] = *b"SCAT";
pub const VERSION: u32 = 1;
pub const FLAG_CLEAN: u32 = 1;
pub const FLAG_NOISY: u32 = 1 << 1;
pub const FLAG_TENSORS: u32 = 1 << 2;
pub const HEADER_BYTES: u64 = 80;

const MAX_SIDE: u32 = 4096;
const MAX_CHANNELS: u32 = 4096;
const MAX_RECEIVERS: u32 = 1 << 20;

/// Scene family stored in the header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Circles,
    CirclesHighContrast,
    Digits,
    Custom,
}

impl Family {
    pub fn code(self) -> u32 {
        match self {
            Family::Circles => 0,
            Family::CirclesHighContrast => 1,
            Family::Digits => 2,
            Family::Custom => 3,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        Ok(match code {
            0 => Family::Circles,
            1 => Family::CirclesHighContrast,
            2 => Family::Digits,
            3 => Family::Custom,
            _ => return Err(Error::Format(format!("unknown family code {code}"))),
        })
    }
}

/// Dataset split, encoded in the top two bits of a sample id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Split {
    Train,
    Val,
    Test,
}

const SPLIT_SHIFT: u32 = 62;
const INDEX_MASK: u64 = (1 << SPLIT_SHIFT) - 1;

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn code(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Val => 1,
            Split::Test => 2,
        }
    }

    /// Split tag of `sample_id`, `None` for the unused tag 3.
    pub fn of(sample_id: u64) -> Option<Split> {
        match sample_id >> SPLIT_SHIFT {
            0 => Some(Split::Train),
            1 => Some(Split::Val),
            2 => Some(Split::Test),
            _ => None,
        }
    }
}

/// `sample_id` for the `index`-th sample of `split`.
pub fn sample_id(split: Split, index: u64) -> u64 {
    assert!(index <= INDEX_MASK, "sample index {index} out of range");
    (split.code() << SPLIT_SHIFT) | index
}

/// Position of a sample within its split.
pub fn sample_index(sample_id: u64) -> u64 {
    sample_id & INDEX_MASK
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainerHeader {
    pub family: Family,
    pub n_inc: usize,
    pub n_rec: usize,
    pub n: usize,
    pub k: f64,
    pub r_meas: f64,
    pub aperture: Aperture,
    pub delta_train: f64,
    pub scale_c: f64,
    pub flags: u32,
}

impl ContainerHeader {
    pub fn from_config(family: Family, cfg: &ExperimentConfig, n: usize, flags: u32) -> Self {
        Self {
            family,
            n_inc: cfg.n_inc,
            n_rec: cfg.n_rec,
            n,
            k: cfg.k,
            r_meas: cfg.r_meas,
            aperture: cfg.aperture,
            delta_train: 0.0,
            scale_c: 0.0,
            flags,
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            k: self.k,
            n_inc: self.n_inc,
            n_rec: self.n_rec,
            r_meas: self.r_meas,
            aperture: self.aperture,
        }
    }

    pub fn has(&self, flag: u32) -> bool {
        self.flags & flag != 0
    }

    fn field_len(&self) -> usize {
        self.n_inc * self.n_rec
    }

    fn tensor_len(&self) -> usize {
        self.n_inc * self.n * self.n
    }

    /// Encoded size of one sample in bytes.
    pub fn sample_bytes(&self) -> u64 {
        let mut b = 16 + 8 * (self.n * self.n) as u64;
        if self.has(FLAG_CLEAN) {
            b += 16 * self.field_len() as u64;
        }
        if self.has(FLAG_NOISY) {
            b += 16 * self.field_len() as u64;
        }
        if self.has(FLAG_TENSORS) {
            b += 8 * self.tensor_len() as u64;
        }
        b
    }

    /// Encoded size of a whole container with `n_samples` samples.
    pub fn container_bytes(&self, n_samples: u64) -> u64 {
        HEADER_BYTES + n_samples * self.sample_bytes() + 8
    }
}

/// One stored sample. Fields are incidence-major (`p * n_rec + r`) and
/// tensors channel-major (`p * n * n + i * n + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleEntry {
    pub sample_id: u64,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub clean: Option<Vec<Complex64>>,
    pub noisy: Option<Vec<Complex64>>,
    pub tensor: Option<Vec<f64>>,
}

/// Which stored field to read back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Clean,
    Noisy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub header: ContainerHeader,
    pub samples: Vec<SampleEntry>,
}

impl Container {
    pub fn new(header: ContainerHeader) -> Self {
        Self {
            header,
            samples: Vec::new(),
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        self.header.config()
    }

    pub fn find(&self, sample_id: u64) -> Option<&SampleEntry> {
        self.samples.iter().find(|s| s.sample_id == sample_id)
    }

    pub fn grid(&self, s: &SampleEntry) -> Result<ContrastGrid> {
        ContrastGrid::from_eps(self.header.n, s.eps.clone())
    }

    pub fn records(&self, s: &SampleEntry, kind: FieldKind) -> Result<Vec<FieldRecord>> {
        let (data, level) = match kind {
            FieldKind::Clean => (s.clean.as_ref(), 0.0),
            FieldKind::Noisy => (s.noisy.as_ref(), self.header.delta_train),
        };
        let data = data.ok_or_else(|| {
            Error::Format(format!("sample {:#x} has no {kind:?} fields", s.sample_id))
        })?;
        Ok(data
            .chunks_exact(self.header.n_rec)
            .enumerate()
            .map(|(p, us)| FieldRecord {
                incidence: p,
                us: us.to_vec(),
                uinf: None,
                noise_level: level,
            })
            .collect())
    }

    /// Stored (unscaled) tensor of a sample.
    pub fn tensor(&self, s: &SampleEntry) -> Result<IndexTensor> {
        let data = s
            .tensor
            .clone()
            .ok_or_else(|| Error::Format(format!("sample {:#x} has no tensor", s.sample_id)))?;
        IndexTensor::new(self.header.n_inc, self.header.n, data)
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.flags & !(FLAG_CLEAN | FLAG_NOISY | FLAG_TENSORS) != 0 {
            return Err(Error::Format(format!(
                "unknown flag bits in {:#x}",
                h.flags
            )));
        }
        if h.n == 0
            || h.n as u32 > MAX_SIDE
            || h.n_inc as u32 > MAX_CHANNELS
            || h.n_rec as u32 > MAX_RECEIVERS
        {
            return Err(Error::Format(format!(
                "implausible shape: n = {}, n_inc = {}, n_rec = {}",
                h.n, h.n_inc, h.n_rec
            )));
        }
        for s in &self.samples {
            let bad = |what: &str| Error::Shape(format!("sample {:#x}: {what}", s.sample_id));
            if s.eps.len() != h.n * h.n {
                return Err(bad("permittivity grid has the wrong size"));
            }
            for (flag, data, name) in [
                (FLAG_CLEAN, s.clean.as_ref().map(Vec::len), "clean fields"),
                (FLAG_NOISY, s.noisy.as_ref().map(Vec::len), "noisy fields"),
            ] {
                match (h.has(flag), data) {
                    (true, Some(len)) if len == h.field_len() => {}
                    (false, None) => {}
                    _ => return Err(bad(&format!("{name} do not match the header"))),
                }
            }
            match (h.has(FLAG_TENSORS), s.tensor.as_ref().map(Vec::len)) {
                (true, Some(len)) if len == h.tensor_len() => {}
                (false, None) => {}
                _ => return Err(bad("tensor does not match the header")),
            }
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        self.validate()?;
        let h = &self.header;
        let mut out = HashingWriter::new(w);
        out.put(&MAGIC)?;
        out.u32(VERSION)?;
        out.u32(h.family.code())?;
        out.u32(
            u32::try_from(self.samples.len())
                .map_err(|_| Error::Format("too many samples".into()))?,
        )?;
        out.u32(h.n_inc as u32)?;
        out.u32(h.n_rec as u32)?;
        out.u32(h.n as u32)?;
        for v in [
            h.k,
            h.r_meas,
            h.aperture.start,
            h.aperture.end,
            h.delta_train,
            h.scale_c,
        ] {
            out.f64(v)?;
        }
        out.u32(h.flags)?;
        for s in &self.samples {
            out.u64(s.sample_id)?;
            out.u64(s.seed)?;
            out.f64s(&s.eps)?;
            for field in [&s.clean, &s.noisy].into_iter().flatten() {
                for z in field {
                    out.f64(z.re)?;
                    out.f64(z.im)?;
                }
            }
            if let Some(t) = &s.tensor {
                out.f64s(t)?;
            }
        }
        let hash = out.hasher.finish();
        let mut inner = out.inner;
        inner.write_all(&hash.to_le_bytes())?;
        inner.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    /// Parses a container; `total_len`, when known, is checked against the
    /// size implied by the header before any payload is read.
    pub fn read_from<R: Read>(r: R, total_len: Option<u64>) -> Result<Self> {
        let mut input = HashingReader::new(r);
        let magic = input.bytes::<4>()?;
        if magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {magic:?}, expected \"SCAT\""
            )));
        }
        let version = input.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let family = Family::from_code(input.u32()?)?;
        let n_samples = input.u32()? as u64;
        let n_inc = input.u32()?;
        let n_rec = input.u32()?;
        let n = input.u32()?;
        if n == 0 || n > MAX_SIDE || n_inc > MAX_CHANNELS || n_rec > MAX_RECEIVERS {
            return Err(Error::Format(format!(
                "implausible shape: n = {n}, n_inc = {n_inc}, n_rec = {n_rec}"
            )));
        }
        let k = input.f64()?;
        let r_meas = input.f64()?;
        let aperture = Aperture {
            start: input.f64()?,
            end: input.f64()?,
        };
        let delta_train = input.f64()?;
        let scale_c = input.f64()?;
        let flags = input.u32()?;
        if flags & !(FLAG_CLEAN | FLAG_NOISY | FLAG_TENSORS) != 0 {
            return Err(Error::Format(format!("unknown flag bits in {flags:#x}")));
        }
        let header = ContainerHeader {
            family,
            n_inc: n_inc as usize,
            n_rec: n_rec as usize,
            n: n as usize,
            k,
            r_meas,
            aperture,
            delta_train,
            scale_c,
            flags,
        };
        if let Some(len) = total_len {
            let expected = header.container_bytes(n_samples);
            if len != expected {
                return Err(Error::Format(format!(
                    "header describes {expected} bytes but the file holds {len}"
                )));
            }
        }

        let mut samples = Vec::new();
        for _ in 0..n_samples {
            let sample_id = input.u64()?;
            let seed = input.u64()?;
            let eps = input.f64s(header.n * header.n)?;
            let clean = if header.has(FLAG_CLEAN) {
                Some(input.complexes(header.field_len())?)
            } else {
                None
            };
            let noisy = if header.has(FLAG_NOISY) {
                Some(input.complexes(header.field_len())?)
            } else {
                None
            };
            let tensor = if header.has(FLAG_TENSORS) {
                Some(input.f64s(header.tensor_len())?)
            } else {
                None
            };
            samples.push(SampleEntry {
                sample_id,
                seed,
                eps,
                clean,
                noisy,
                tensor,
            });
        }
        let computed = input.hasher.finish();
        let mut tail = [0u8; 8];
        input.read_raw(&mut tail)?;
        let stored = u64::from_le_bytes(tail);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let mut extra = [0u8; 1];
        if input.inner.read(&mut extra)? != 0 {
            return Err(Error::Format("trailing bytes after checksum".into()));
        }
        Ok(Self { header, samples })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes, Some(bytes.len() as u64))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        Self::read_from(BufReader::new(file), Some(len))
    }
}

struct HashingWriter<W> {
    inner: W,
    hasher: FnvHasher,
}

impl<W: Write> HashingWriter<W> {
    fn new(inner: W) -> Self {
        Self {
            inner,
            hasher: FnvHasher::default(),
        }
    }

    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.hasher.write(bytes);
        self.inner.write_all(bytes)?;
        Ok(())
    }

    fn u32(&mut self, v: u32) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    fn f64(&mut self, v: f64) -> Result<()> {
        self.put(&v.to_le_bytes())
    }

    fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        let mut buf = Vec::with_capacity(8 * vs.len());
        for v in vs {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.put(&buf)
    }
}

struct HashingReader<R> {
    inner: R,
    hasher: FnvHasher,
    offset: usize,
}

const CHUNK_VALUES: usize = 8192;

impl<R: Read> HashingReader<R> {
    fn new(inner: R) -> Self {
        Self {
            inner,
            hasher: FnvHasher::default(),
            offset: 0,
        }
    }

    fn read_raw(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Parse {
                        offset: self.offset + filled,
                        message: format!(
                            "unexpected end of data: needed {} more bytes",
                            buf.len() - filled
                        ),
                    })
                }
                Ok(m) => filled += m,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += buf.len();
        Ok(())
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.read_raw(buf)?;
        self.hasher.write(buf);
        Ok(())
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.fill(&mut b)?;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    // reads in bounded chunks so a corrupt count fails on EOF instead of
    // allocating up front
    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(count.min(CHUNK_VALUES));
        let mut buf = vec![0u8; 8 * count.min(CHUNK_VALUES)];
        let mut left = count;
        while left > 0 {
            let m = left.min(CHUNK_VALUES);
            let chunk = &mut buf[..8 * m];
            self.fill(chunk)?;
            out.extend(
                chunk
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))),
            );
            left -= m;
        }
        Ok(out)
    }

    fn complexes(&mut self, count: usize) -> Result<Vec<Complex64>> {
        let flat = self.f64s(2 * count)?;
        Ok(flat
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect())
    }
}
