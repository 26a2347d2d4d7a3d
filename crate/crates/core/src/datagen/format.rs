//! "PXOM" dataset files.
//!
//! ```text
//! magic     4 bytes  "PXOM"
//! version   u32 LE   1
//! d         u32 LE   grid side
//! channels  u32 LE   4
//! count     u64 LE   number of records
//! records   count × { d·d·4 f32 LE map values, 3 f32 LE normal }
//! ```
//!
//! Map values are row-major over the grid with channels interleaved.

use std::io::{self, Read, Write};

use crate::geom::Vec3;
use crate::obsmap::{ObservationMap, CHANNELS};

use super::TrainingRecord;

pub const MAGIC: &[u8; 4] = b"PXOM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("bad magic {0:?}, not a PXOM dataset")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset version {0}")]
    VersionUnsupported(u32),
    #[error("dataset declares {channels} channels, expected {CHANNELS}")]
    ChannelMismatch { channels: u32 },
    #[error("dataset truncated: header declares {declared} records, payload holds {found}")]
    TruncatedFile { declared: u64, found: u64 },
    #[error("dataset has bytes after the declared {declared} records")]
    TrailingData { declared: u64 },
    #[error("wrote {written} records but the header declares {declared}")]
    CountMismatch { declared: u64, written: u64 },
    #[error("record grid {found} does not match dataset grid {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub version: u32,
    pub d: u32,
    pub channels: u32,
    pub count: u64,
}

impl DatasetHeader {
    pub fn record_len(&self) -> usize {
        (self.d as usize * self.d as usize * self.channels as usize + 3) * 4
    }
}

/// Streams records into a sink. The record count is fixed up front.
pub struct DatasetWriter<W: Write> {
    sink: W,
    d: usize,
    declared: u64,
    written: u64,
    buf: Vec<u8>,
}

impl<W: Write> DatasetWriter<W> {
    pub fn new(mut sink: W, d: usize, count: u64) -> Result<Self, DatasetError> {
        sink.write_all(MAGIC)?;
        sink.write_all(&VERSION.to_le_bytes())?;
        sink.write_all(&(d as u32).to_le_bytes())?;
        sink.write_all(&(CHANNELS as u32).to_le_bytes())?;
        sink.write_all(&count.to_le_bytes())?;
        Ok(DatasetWriter {
            sink,
            d,
            declared: count,
            written: 0,
            buf: Vec::with_capacity((d * d * CHANNELS + 3) * 4),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn write_record(&mut self, rec: &TrainingRecord) -> Result<(), DatasetError> {
        self.write_parts(&rec.map, rec.normal.to_array())
    }

    /// Writes a map with an arbitrary normal triple (zeros for unlabeled maps).
    pub fn write_parts(&mut self, map: &ObservationMap, normal: [f64; 3]) -> Result<(), DatasetError> {
        if map.d() != self.d {
            return Err(DatasetError::GridMismatch {
                expected: self.d,
                found: map.d(),
            });
        }
        if self.written == self.declared {
            return Err(DatasetError::CountMismatch {
                declared: self.declared,
                written: self.written + 1,
            });
        }
        self.buf.clear();
        for v in map.grid() {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
        for c in normal {
            self.buf.extend_from_slice(&(c as f32).to_le_bytes());
        }
        self.sink.write_all(&self.buf)?;
        self.written += 1;
        Ok(())
    }

    /// Flushes and returns the sink; fails if fewer records were written
    /// than declared.
    pub fn finish(mut self) -> Result<W, DatasetError> {
        if self.written != self.declared {
            return Err(DatasetError::CountMismatch {
                declared: self.declared,
                written: self.written,
            });
        }
        self.sink.flush()?;
        Ok(self.sink)
    }
}

/// Record-at-a-time reader.
pub struct DatasetReader<R: Read> {
    source: R,
    header: DatasetHeader,
    read: u64,
    buf: Vec<u8>,
}

impl<R: Read> DatasetReader<R> {
    pub fn new(mut source: R) -> Result<Self, DatasetError> {
        let mut head = [0u8; HEADER_LEN];
        let n = read_full(&mut source, &mut head)?;
        if n < 4 || &head[..4] != MAGIC {
            let mut magic = [0u8; 4];
            magic[..n.min(4)].copy_from_slice(&head[..n.min(4)]);
            return Err(DatasetError::BadMagic(magic));
        }
        if n < HEADER_LEN {
            return Err(DatasetError::TruncatedFile {
                declared: 0,
                found: 0,
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
        let header = DatasetHeader {
            version: u32_at(4),
            d: u32_at(8),
            channels: u32_at(12),
            count: u64::from_le_bytes(head[16..24].try_into().unwrap()),
        };
        if header.version != VERSION {
            return Err(DatasetError::VersionUnsupported(header.version));
        }
        if header.channels as usize != CHANNELS {
            return Err(DatasetError::ChannelMismatch {
                channels: header.channels,
            });
        }
        let buf = vec![0u8; header.record_len()];
        Ok(DatasetReader {
            source,
            header,
            read: 0,
            buf,
        })
    }

    pub fn header(&self) -> DatasetHeader {
        self.header
    }

    /// Next map and its raw normal triple.
    pub fn next_parts(&mut self) -> Option<Result<(ObservationMap, [f32; 3]), DatasetError>> {
        if self.read == self.header.count {
            return None;
        }
        match read_full(&mut self.source, &mut self.buf) {
            Err(e) => return Some(Err(e.into())),
            Ok(n) if n < self.buf.len() => {
                return Some(Err(DatasetError::TruncatedFile {
                    declared: self.header.count,
                    found: self.read,
                }))
            }
            Ok(_) => {}
        }
        self.read += 1;
        let d = self.header.d as usize;
        let values: Vec<f32> = self
            .buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let cells = d * d * CHANNELS;
        let normal = [values[cells], values[cells + 1], values[cells + 2]];
        let map = ObservationMap::from_grid(d, values[..cells].to_vec());
        Some(Ok((map, normal)))
    }

    /// Checks that nothing follows the declared records.
    pub fn expect_end(mut self) -> Result<(), DatasetError> {
        let mut probe = [0u8; 1];
        if read_full(&mut self.source, &mut probe)? != 0 {
            return Err(DatasetError::TrailingData {
                declared: self.header.count,
            });
        }
        Ok(())
    }
}

impl<R: Read> Iterator for DatasetReader<R> {
    type Item = Result<TrainingRecord, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_parts().map(|r| {
            r.map(|(map, n)| {
                let normal = Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64)
                    .normalized()
                    .unwrap_or(crate::geom::VIEW);
                TrainingRecord { map, normal }
            })
        })
    }
}

fn read_full(source: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub fn write_dataset<W: Write>(sink: W, d: usize, records: &[TrainingRecord]) -> Result<W, DatasetError> {
    let mut w = DatasetWriter::new(sink, d, records.len() as u64)?;
    for r in records {
        w.write_record(r)?;
    }
    w.finish()
}

/// Reads every record; trailing bytes after the declared count are an error.
pub fn read_dataset<R: Read>(source: R) -> Result<(DatasetHeader, Vec<TrainingRecord>), DatasetError> {
    let mut reader = DatasetReader::new(source)?;
    let header = reader.header();
    let records = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    reader.expect_end()?;
    Ok((header, records))
}
