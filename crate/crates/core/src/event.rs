//! Event tuples, time-ordered event streams, and the two on-disk event
//! formats: EVT-CSV (text) and EVB1 (little-endian binary).

use crate::error::{Error, Result};

/// Size of the EVB1 header: magic, width, height, count.
pub const EVB1_HEADER_LEN: usize = 16;
/// Size of one EVB1 record: x u16, y u16, t u64, p i8.
pub const EVB1_RECORD_LEN: usize = 13;
const EVB1_MAGIC: &[u8; 4] = b"EVB1";

/// A single brightness-change report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    /// Timestamp in microseconds.
    pub t: u64,
    /// Polarity, always -1 or +1.
    pub p: i8,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, p: i8) -> Self {
        Event { x, y, t, p }
    }
}

/// Events from one sensor, sorted by timestamp (stable for ties).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    width: u16,
    height: u16,
    events: Vec<Event>,
}

impl EventStream {
    /// Builds a stream, rejecting unsorted input, bad polarities and
    /// out-of-bounds coordinates.
    pub fn new(width: u16, height: u16, events: Vec<Event>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            check_event(i, e, width, height)?;
            if i > 0 && events[i - 1].t > e.t {
                return Err(Error::Unsorted { index: i });
            }
        }
        Ok(EventStream {
            width,
            height,
            events,
        })
    }

    /// Builds a stream from events in arbitrary order using a stable sort.
    pub fn from_unsorted(width: u16, height: u16, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by_key(|e| e.t);
        Self::new(width, height, events)
    }

    pub fn empty(width: u16, height: u16) -> Self {
        EventStream {
            width,
            height,
            events: Vec::new(),
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// First and last timestamp, if any.
    pub fn time_span(&self) -> Option<(u64, u64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    /// Borrowed view of the events in `[t0, t1)`.
    pub fn window(&self, t0: u64, t1: u64) -> &[Event] {
        let lo = self.events.partition_point(|e| e.t < t0);
        let hi = self.events.partition_point(|e| e.t < t1).max(lo);
        &self.events[lo..hi]
    }

    /// Owned copy of the events in the half-open window `[t0, t1)`.
    pub fn slice(&self, t0: u64, t1: u64) -> Result<EventStream> {
        if t0 > t1 {
            return Err(Error::invalid(format!("slice start {t0} after end {t1}")));
        }
        Ok(EventStream {
            width: self.width,
            height: self.height,
            events: self.window(t0, t1).to_vec(),
        })
    }
}

fn check_event(index: usize, e: &Event, width: u16, height: u16) -> Result<()> {
    if e.p != 1 && e.p != -1 {
        return Err(Error::Polarity(e.p as i64));
    }
    if e.x >= width || e.y >= height {
        return Err(Error::OutOfBounds {
            index,
            x: e.x as u32,
            y: e.y as u32,
            width: width as u32,
            height: height as u32,
        });
    }
    Ok(())
}

/// Free-function form of [`EventStream::slice`].
pub fn slice_events(stream: &EventStream, t0: u64, t1: u64) -> Result<EventStream> {
    stream.slice(t0, t1)
}

/// Parses EVT-CSV: a `width=<u>,height=<u>` header followed by `x,y,t_us,p`
/// lines. Line numbers in diagnostics are 1-based and count the header.
pub fn parse_events_csv(text: &[u8]) -> Result<EventStream> {
    let text = std::str::from_utf8(text).map_err(|e| Error::parse(1, format!("not UTF-8: {e}")))?;
    let mut lines = text.split('\n').enumerate();
    let (width, height) = match lines.next() {
        Some((_, header)) => parse_csv_header(header.trim_end_matches('\r'))?,
        None => return Err(Error::parse(1, "missing header")),
    };

    let mut events = Vec::new();
    let mut last_t = 0u64;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 fields x,y,t,p, found {}", fields.len()),
            ));
        }
        let num = |s: &str, name: &str| -> Result<i64> {
            s.parse::<i64>()
                .map_err(|_| Error::parse(line_no, format!("invalid {name} {s:?}")))
        };
        let x = num(fields[0], "x")?;
        let y = num(fields[1], "y")?;
        let t = fields[2]
            .parse::<u64>()
            .map_err(|_| Error::parse(line_no, format!("invalid timestamp {:?}", fields[2])))?;
        let p = num(fields[3], "polarity")?;
        if p != 1 && p != -1 {
            return Err(Error::parse(
                line_no,
                format!("invalid polarity {p}, must be -1 or 1"),
            ));
        }
        if x < 0 || y < 0 || x >= width as i64 || y >= height as i64 {
            return Err(Error::parse(
                line_no,
                format!("coordinates ({x},{y}) outside {width}x{height} sensor"),
            ));
        }
        if !events.is_empty() && t < last_t {
            return Err(Error::NonMonotone { line: line_no });
        }
        last_t = t;
        events.push(Event::new(x as u16, y as u16, t, p as i8));
    }
    Ok(EventStream {
        width,
        height,
        events,
    })
}

fn parse_csv_header(header: &str) -> Result<(u16, u16)> {
    let mut width = None;
    let mut height = None;
    for part in header.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field {part:?}")))?;
        let value: u16 = value
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, format!("invalid header value {value:?}")))?;
        match key.trim() {
            "width" => width = Some(value),
            "height" => height = Some(value),
            other => return Err(Error::parse(1, format!("unknown header key {other:?}"))),
        }
    }
    match (width, height) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(Error::parse(1, "header must be width=<u>,height=<u>")),
    }
}

/// Writes EVT-CSV with LF line endings.
pub fn write_events_csv(stream: &EventStream) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(32 + stream.len() * 20);
    let _ = writeln!(out, "width={},height={}", stream.width, stream.height);
    for e in &stream.events {
        let _ = writeln!(out, "{},{},{},{}", e.x, e.y, e.t, e.p);
    }
    out
}

/// Decodes an EVB1 buffer.
pub fn parse_events_binary(bytes: &[u8]) -> Result<EventStream> {
    if bytes.len() < EVB1_HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != EVB1_MAGIC {
            return Err(Error::BadMagic {
                found: bytes[..4].try_into().unwrap(),
            });
        }
        return Err(Error::Truncated {
            expected: EVB1_HEADER_LEN,
            available: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if &magic != EVB1_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let width = u16::from_le_bytes([bytes[4], bytes[5]]);
    let height = u16::from_le_bytes([bytes[6], bytes[7]]);
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());

    let payload = &bytes[EVB1_HEADER_LEN..];
    let expected = (count as u128) * EVB1_RECORD_LEN as u128;
    if (payload.len() as u128) < expected {
        return Err(Error::Truncated {
            expected: (expected + EVB1_HEADER_LEN as u128).min(usize::MAX as u128) as usize,
            available: bytes.len(),
        });
    }
    if payload.len() as u128 != expected {
        return Err(Error::CountMismatch {
            declared: count,
            actual: (payload.len() / EVB1_RECORD_LEN) as u64,
        });
    }

    let mut events = Vec::with_capacity(count as usize);
    for (i, rec) in payload.chunks_exact(EVB1_RECORD_LEN).enumerate() {
        let e = Event {
            x: u16::from_le_bytes([rec[0], rec[1]]),
            y: u16::from_le_bytes([rec[2], rec[3]]),
            t: u64::from_le_bytes(rec[4..12].try_into().unwrap()),
            p: rec[12] as i8,
        };
        check_event(i, &e, width, height)?;
        if let Some(prev) = events.last() {
            let prev: &Event = prev;
            if prev.t > e.t {
                return Err(Error::Unsorted { index: i });
            }
        }
        events.push(e);
    }
    Ok(EventStream {
        width,
        height,
        events,
    })
}

/// Encodes a stream as EVB1.
pub fn write_events_binary(stream: &EventStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(EVB1_HEADER_LEN + stream.len() * EVB1_RECORD_LEN);
    out.extend_from_slice(EVB1_MAGIC);
    out.extend_from_slice(&stream.width.to_le_bytes());
    out.extend_from_slice(&stream.height.to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    for e in &stream.events {
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.y.to_le_bytes());
        out.extend_from_slice(&e.t.to_le_bytes());
        out.push(e.p as u8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_single_record() {
        let s = parse_events_csv(b"width=4,height=4\n1,2,100,1\n").unwrap();
        assert_eq!((s.width(), s.height()), (4, 4));
        assert_eq!(s.events(), &[Event::new(1, 2, 100, 1)]);
    }

    #[test]
    fn csv_empty_body() {
        let s = parse_events_csv(b"width=4,height=4\n").unwrap();
        assert!(s.is_empty());
        assert_eq!((s.width(), s.height()), (4, 4));
    }

    #[test]
    fn csv_non_monotone() {
        let err = parse_events_csv(b"width=4,height=4\n0,0,5,1\n0,0,3,1\n").unwrap_err();
        assert_eq!(err.to_string(), "non-monotone timestamps at line 3");
    }

    #[test]
    fn csv_rejects_bad_polarity_and_bounds() {
        let err = parse_events_csv(b"width=4,height=4\n0,0,5,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_events_csv(b"width=4,height=4\n4,0,5,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_events_csv(b"width=4,height=4\n1,1,5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_events_csv(b"w=4,height=4\n").is_err());
    }

    #[test]
    fn binary_empty_stream() {
        let mut bytes = b"EVB1".to_vec();
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&2u16.to_le_bytes());
        bytes.extend_from_slice(&0u64.to_le_bytes());
        let s = parse_events_binary(&bytes).unwrap();
        assert!(s.is_empty());
        assert_eq!((s.width(), s.height()), (2, 2));
    }

    #[test]
    fn binary_sizes() {
        assert_eq!(write_events_binary(&EventStream::empty(720, 1280)).len(), 16);
        let one = EventStream::new(4, 4, vec![Event::new(1, 1, 7, -1)]).unwrap();
        assert_eq!(write_events_binary(&one).len(), 16 + 13);
    }

    #[test]
    fn binary_truncated_names_byte_counts() {
        let s = EventStream::new(4, 4, vec![Event::new(1, 1, 7, -1), Event::new(2, 2, 9, 1)])
            .unwrap();
        let bytes = write_events_binary(&s);
        let err = parse_events_binary(&bytes[..bytes.len() - 5]).unwrap_err();
        match err {
            Error::Truncated {
                expected,
                available,
            } => {
                assert_eq!(expected, 42);
                assert_eq!(available, 37);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err_is_truncated(&bytes[..10]));
    }

    fn err_is_truncated(b: &[u8]) -> bool {
        matches!(parse_events_binary(b), Err(Error::Truncated { .. }))
    }

    #[test]
    fn binary_bad_magic_and_count() {
        let s = EventStream::new(4, 4, vec![Event::new(1, 1, 7, -1)]).unwrap();
        let mut bytes = write_events_binary(&s);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            parse_events_binary(&bad),
            Err(Error::BadMagic { .. })
        ));
        bytes.extend_from_slice(&[0u8; 13]);
        assert!(matches!(
            parse_events_binary(&bytes),
            Err(Error::CountMismatch {
                declared: 1,
                actual: 2
            })
        ));
    }

    #[test]
    fn slice_edges() {
        let s = EventStream::new(
            4,
            4,
            vec![
                Event::new(0, 0, 3, 1),
                Event::new(1, 0, 5, 1),
                Event::new(2, 0, 5, -1),
                Event::new(3, 0, 9, 1),
            ],
        )
        .unwrap();
        assert!(s.slice(0, 0).unwrap().is_empty());
        assert_eq!(s.slice(3, 10).unwrap(), s);
        assert_eq!(s.slice(5, 6).unwrap().len(), 2);
        assert!(s.slice(6, 5).is_err());
    }

    fn arb_stream() -> impl Strategy<Value = EventStream> {
        (1u16..64, 1u16..64).prop_flat_map(|(w, h)| {
            prop::collection::vec((0..w, 0..h, 0u64..10_000, prop::bool::ANY), 0..200).prop_map(
                move |raw| {
                    let events = raw
                        .into_iter()
                        .map(|(x, y, t, pos)| Event::new(x, y, t, if pos { 1 } else { -1 }))
                        .collect();
                    EventStream::from_unsorted(w, h, events).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn binary_round_trip(s in arb_stream()) {
            let bytes = write_events_binary(&s);
            let back = parse_events_binary(&bytes).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(write_events_binary(&back), bytes);
        }

        #[test]
        fn csv_round_trip(s in arb_stream()) {
            let text = write_events_csv(&s);
            prop_assert_eq!(parse_events_csv(text.as_bytes()).unwrap(), s);
        }

        #[test]
        fn slices_partition(s in arb_stream(), a in 0u64..4000, b in 0u64..4000, c in 0u64..4000) {
            let mut v = [a, b, c];
            v.sort_unstable();
            let [a, b, c] = v;
            let mut joined = s.slice(a, b).unwrap().into_events();
            joined.extend(s.slice(b, c).unwrap().into_events());
            prop_assert_eq!(joined, s.slice(a, c).unwrap().into_events());
        }
    }
}
