use std::io::{Read, Write};

use super::NetError;

pub const FRAME_VERSION: u8 = 1;
pub const FRAME_HEADER_LEN: usize = 6;
pub const DEFAULT_MAX_FRAME: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: u8, payload: Vec<u8>) -> Self {
        Frame { msg_type, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + self.payload.len());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.push(FRAME_VERSION);
        out.push(self.msg_type);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Decodes exactly one frame occupying all of `bytes`.
    pub fn decode(bytes: &[u8], max_payload: usize) -> Result<Frame, NetError> {
        let (frame, used) = Self::decode_prefix(bytes, max_payload)?;
        if used != bytes.len() {
            return Err(NetError::Decode(crate::wire::WireError::TrailingBytes(bytes.len() - used)));
        }
        Ok(frame)
    }

    /// Decodes the frame at the start of `bytes`, returning it and its size.
    pub fn decode_prefix(bytes: &[u8], max_payload: usize) -> Result<(Frame, usize), NetError> {
        if bytes.len() < FRAME_HEADER_LEN {
            return Err(NetError::Truncated);
        }
        let len = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        if len > max_payload {
            return Err(NetError::Oversize(len));
        }
        if bytes[4] != FRAME_VERSION {
            return Err(NetError::BadVersion(bytes[4]));
        }
        if bytes.len() < FRAME_HEADER_LEN + len {
            return Err(NetError::Truncated);
        }
        let frame = Frame { msg_type: bytes[5], payload: bytes[FRAME_HEADER_LEN..FRAME_HEADER_LEN + len].to_vec() };
        Ok((frame, FRAME_HEADER_LEN + len))
    }
}

/// Reads one frame and returns its raw bytes (header included).
pub fn read_frame<R: Read>(r: &mut R, max_payload: usize) -> Result<Vec<u8>, NetError> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    r.read_exact(&mut header)?;
    let len = u32::from_be_bytes(header[..4].try_into().unwrap()) as usize;
    if len > max_payload {
        return Err(NetError::Oversize(len));
    }
    if header[4] != FRAME_VERSION {
        return Err(NetError::BadVersion(header[4]));
    }
    let mut out = vec![0u8; FRAME_HEADER_LEN + len];
    out[..FRAME_HEADER_LEN].copy_from_slice(&header);
    r.read_exact(&mut out[FRAME_HEADER_LEN..])?;
    Ok(out)
}

pub fn write_frame<W: Write>(w: &mut W, raw: &[u8]) -> Result<(), NetError> {
    w.write_all(raw)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_errors() {
        let f = Frame::new(7, b"hello".to_vec());
        let bytes = f.encode();
        assert_eq!(Frame::decode(&bytes, 100).unwrap(), f);
        assert_eq!(Frame::decode(&bytes[..bytes.len() - 1], 100), Err(NetError::Truncated));
        assert_eq!(Frame::decode(&bytes[..3], 100), Err(NetError::Truncated));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(Frame::decode(&bad, 100), Err(NetError::BadVersion(9)));
        assert_eq!(Frame::decode(&bytes, 4), Err(NetError::Oversize(5)));
    }

    #[test]
    fn oversize_megabyte() {
        let f = Frame::new(1, vec![0u8; DEFAULT_MAX_FRAME + 1]);
        let bytes = f.encode();
        assert_eq!(Frame::decode(&bytes, DEFAULT_MAX_FRAME), Err(NetError::Oversize(DEFAULT_MAX_FRAME + 1)));
        assert!(matches!(read_frame(&mut &bytes[..], DEFAULT_MAX_FRAME), Err(NetError::Oversize(_))));
    }

    #[test]
    fn stream_read() {
        let a = Frame::new(1, vec![1, 2, 3]).encode();
        let b = Frame::new(2, vec![]).encode();
        let joined = [a.clone(), b.clone()].concat();
        let mut cursor = &joined[..];
        assert_eq!(read_frame(&mut cursor, 10).unwrap(), a);
        assert_eq!(read_frame(&mut cursor, 10).unwrap(), b);
        assert_eq!(read_frame(&mut cursor, 10), Err(NetError::Closed));
    }
}
