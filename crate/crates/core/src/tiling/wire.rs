//! Protocol-buffer wire primitives used by the MVT codec.

use super::TilingError;

pub const WIRE_VARINT: u8 = 0;
pub const WIRE_FIXED64: u8 = 1;
pub const WIRE_LEN: u8 = 2;
pub const WIRE_FIXED32: u8 = 5;

#[derive(Debug, Default)]
pub struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn varint(&mut self, mut v: u64) {
        while v >= 0x80 {
            self.buf.push((v as u8) | 0x80);
            v >>= 7;
        }
        self.buf.push(v as u8);
    }

    pub fn key(&mut self, field: u32, wire: u8) {
        self.varint(((field as u64) << 3) | wire as u64);
    }

    pub fn varint_field(&mut self, field: u32, v: u64) {
        self.key(field, WIRE_VARINT);
        self.varint(v);
    }

    pub fn bytes_field(&mut self, field: u32, bytes: &[u8]) {
        self.key(field, WIRE_LEN);
        self.varint(bytes.len() as u64);
        self.buf.extend_from_slice(bytes);
    }

    pub fn packed_field(&mut self, field: u32, values: &[u32]) {
        let mut inner = Writer::new();
        for &v in values {
            inner.varint(v as u64);
        }
        self.bytes_field(field, &inner.buf);
    }

    pub fn fixed32_field(&mut self, field: u32, bits: u32) {
        self.key(field, WIRE_FIXED32);
        self.buf.extend_from_slice(&bits.to_le_bytes());
    }

    pub fn fixed64_field(&mut self, field: u32, bits: u64) {
        self.key(field, WIRE_FIXED64);
        self.buf.extend_from_slice(&bits.to_le_bytes());
    }
}

/// Cursor over a byte slice that reports absolute offsets in errors.
#[derive(Debug, Clone)]
pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, base: 0 }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.data.len()
    }

    pub fn offset(&self) -> usize {
        self.base + self.pos
    }

    pub fn error(&self, message: impl Into<String>) -> TilingError {
        TilingError::Parse {
            offset: self.offset(),
            message: message.into(),
        }
    }

    pub fn varint(&mut self) -> Result<u64, TilingError> {
        let start = self.offset();
        let mut v: u64 = 0;
        for i in 0..10 {
            let Some(&b) = self.data.get(self.pos) else {
                return Err(TilingError::Parse {
                    offset: start,
                    message: "truncated varint".into(),
                });
            };
            self.pos += 1;
            if i == 9 && b > 1 {
                break;
            }
            v |= ((b & 0x7f) as u64) << (7 * i);
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(TilingError::Parse {
            offset: start,
            message: "varint exceeds 64 bits".into(),
        })
    }

    /// Reads a field key, returning `(field number, wire type)`.
    pub fn key(&mut self) -> Result<(u32, u8), TilingError> {
        let start = self.offset();
        let k = self.varint()?;
        let field = k >> 3;
        if field == 0 || field > u32::MAX as u64 {
            return Err(TilingError::Parse {
                offset: start,
                message: format!("invalid field number {field}"),
            });
        }
        Ok((field as u32, (k & 7) as u8))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], TilingError> {
        if self.data.len() - self.pos < n {
            return Err(self.error(format!("need {n} bytes, {} remain", self.data.len() - self.pos)));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Reads a length-delimited payload as a sub-reader.
    pub fn sub(&mut self) -> Result<Reader<'a>, TilingError> {
        let len = self.varint()?;
        let len = usize::try_from(len).map_err(|_| self.error("length overflows usize"))?;
        let base = self.offset();
        let data = self.take(len)?;
        Ok(Reader { data, pos: 0, base })
    }

    pub fn fixed32(&mut self) -> Result<u32, TilingError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    pub fn fixed64(&mut self) -> Result<u64, TilingError> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    pub fn string(&mut self) -> Result<String, TilingError> {
        let start = self.offset();
        let sub = self.sub()?;
        String::from_utf8(sub.data.to_vec()).map_err(|_| TilingError::Parse {
            offset: start,
            message: "string is not valid UTF-8".into(),
        })
    }

    /// Reads a repeated varint field in either packed or unpacked form.
    pub fn repeated_u32(&mut self, wire: u8, out: &mut Vec<u32>) -> Result<(), TilingError> {
        match wire {
            WIRE_LEN => {
                let mut sub = self.sub()?;
                while !sub.at_end() {
                    out.push(sub.u32_varint()?);
                }
                Ok(())
            }
            WIRE_VARINT => {
                out.push(self.u32_varint()?);
                Ok(())
            }
            _ => Err(self.error(format!("wire type {wire} invalid for repeated uint32"))),
        }
    }

    pub fn u32_varint(&mut self) -> Result<u32, TilingError> {
        let start = self.offset();
        let v = self.varint()?;
        u32::try_from(v).map_err(|_| TilingError::Parse {
            offset: start,
            message: format!("value {v} does not fit uint32"),
        })
    }

    pub fn skip(&mut self, wire: u8) -> Result<(), TilingError> {
        match wire {
            WIRE_VARINT => self.varint().map(drop),
            WIRE_FIXED64 => self.take(8).map(drop),
            WIRE_LEN => self.sub().map(drop),
            WIRE_FIXED32 => self.take(4).map(drop),
            other => Err(self.error(format!("unsupported wire type {other}"))),
        }
    }

    pub fn expect_wire(&self, wire: u8, expected: u8, field: &str) -> Result<(), TilingError> {
        if wire != expected {
            return Err(self.error(format!("field {field} has wire type {wire}, expected {expected}")));
        }
        Ok(())
    }
}
