//! Little-endian, length-prefixed framing shared by the machine and guest
//! program encodings.
//!
//! Frame layout: 4-byte magic, 1-byte version, `u32` body length, body.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError {
    pub offset: usize,
    pub message: String,
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    pub fn frame(self, magic: &[u8; 4], version: u8) -> Vec<u8> {
        let body = self.buf;
        let len = u32::try_from(body.len()).expect("encoding larger than 4 GiB");
        let mut out = Vec::with_capacity(9 + body.len());
        out.extend_from_slice(magic);
        out.push(version);
        out.extend_from_slice(&len.to_le_bytes());
        out.extend_from_slice(&body);
        out
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Check the frame header and return a reader over the body. Offsets in
    /// errors are relative to the start of the frame.
    pub fn open(buf: &'a [u8], magic: &[u8; 4], version: u8) -> Result<Self, WireError> {
        let mut r = Reader { buf, pos: 0 };
        let m = r.take(4)?;
        if m != magic {
            return Err(r.error_at(0, "bad magic"));
        }
        let v = r.u8()?;
        if v != version {
            return Err(r.error_at(4, format!("unsupported version {v}")));
        }
        let len = r.u32()? as usize;
        let expected = 9usize
            .checked_add(len)
            .ok_or_else(|| r.error_at(5, "length overflow"))?;
        if buf.len() < expected {
            return Err(r.error_at(buf.len(), format!("truncated: body needs {len} bytes")));
        }
        if buf.len() > expected {
            return Err(r.error_at(expected, "trailing bytes after body"));
        }
        Ok(r)
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    pub fn error_at(&self, offset: usize, message: impl Into<String>) -> WireError {
        WireError {
            offset,
            message: message.into(),
        }
    }

    pub fn error(&self, message: impl Into<String>) -> WireError {
        self.error_at(self.pos, message)
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    pub fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn finish(self) -> Result<(), WireError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(self.error("unused bytes at end of body"))
        }
    }
}
