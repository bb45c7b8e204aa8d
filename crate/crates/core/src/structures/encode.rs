//! Injective byte encoding of string tuples: an element count followed by
//! each element as a little-endian `u32` length and its bytes.

pub fn encode_into<S: AsRef<str>>(parts: &[S], buf: &mut Vec<u8>) {
    buf.clear();
    buf.extend_from_slice(&(parts.len() as u32).to_le_bytes());
    for p in parts {
        let p = p.as_ref().as_bytes();
        buf.extend_from_slice(&(p.len() as u32).to_le_bytes());
        buf.extend_from_slice(p);
    }
}

pub fn encode<S: AsRef<str>>(parts: &[S]) -> Box<[u8]> {
    let mut buf = Vec::new();
    encode_into(parts, &mut buf);
    buf.into_boxed_slice()
}

/// Inverse of [`encode`]; `None` on malformed input.
pub fn decode(mut bytes: &[u8]) -> Option<Vec<String>> {
    fn take_u32(bytes: &mut &[u8]) -> Option<usize> {
        let (head, rest) = bytes.split_first_chunk::<4>()?;
        *bytes = rest;
        Some(u32::from_le_bytes(*head) as usize)
    }
    let n = take_u32(&mut bytes)?;
    let mut out = Vec::with_capacity(n.min(bytes.len()));
    for _ in 0..n {
        let len = take_u32(&mut bytes)?;
        if bytes.len() < len {
            return None;
        }
        let (s, rest) = bytes.split_at(len);
        out.push(String::from_utf8(s.to_vec()).ok()?);
        bytes = rest;
    }
    bytes.is_empty().then_some(out)
}
