//! Link frames exchanged during initialization.
//!
//! A frame is one message: a kind word followed by its fields, then END.
//! Frames travel hop by hop between boot processes over raw links; switched
//! routing is not used until tables exist.

use crate::fabric::Word;

const BOOT: Word = 0xB0;
const PROBE: Word = 0x01;
const REPLY: Word = 0x02;
const CONFIRM: Word = 0x03;
const ROUTED: Word = 0x04;
const UP: Word = 0x05;
const ESTABLISH: Word = 0x06;

const ENUMERATE: Word = 0x10;
const FLOOD: Word = 0x11;
const ACK: Word = 0x12;
const COUNT: Word = 0x13;
const CREDIT: Word = 0x14;
const DEBIT: Word = 0x15;
const DONE: Word = 0x20;
const ROUTINE: Word = 0x21;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Boot { first: bool, image: Vec<Word> },
    Probe { prober: u16, candidate: u16, seq: Word },
    /// `recv_link` is the replier's link on which the probe arrived;
    /// `fresh` is set when the replier adopted the candidate number.
    Reply { prober: u16, number: u16, recv_link: u8, fresh: bool, seq: Word },
    Confirm { prober: u16, number: u16, recv_link: u8, fresh: bool },
    /// Forwarded along routing table entries to `target`.
    Routed { target: u16, inner: Inner },
    /// Forwarded toward the first processor.
    Up { inner: Inner },
    Establish { origin: u16, hops: Word },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inner {
    Enumerate { next_number: u16 },
    Flood,
    Ack,
    Count { reporter: u16, numbers: Vec<u16> },
    Credit { reporter: u16, origin: u16, delta: Word },
    Debit { reporter: u16, origin: u16 },
    Done { processors: u16 },
    Routine,
}

impl Inner {
    fn encode_into(&self, v: &mut Vec<Word>) {
        match self {
            Inner::Enumerate { next_number } => v.extend([ENUMERATE, *next_number as Word]),
            Inner::Flood => v.push(FLOOD),
            Inner::Ack => v.push(ACK),
            Inner::Count { reporter, numbers } => {
                v.extend([COUNT, *reporter as Word, numbers.len() as Word]);
                v.extend(numbers.iter().map(|&n| n as Word));
            }
            Inner::Credit { reporter, origin, delta } => v.extend([CREDIT, *reporter as Word, *origin as Word, *delta]),
            Inner::Debit { reporter, origin } => v.extend([DEBIT, *reporter as Word, *origin as Word]),
            Inner::Done { processors } => v.extend([DONE, *processors as Word]),
            Inner::Routine => v.push(ROUTINE),
        }
    }

    pub fn encode(&self) -> Vec<Word> {
        let mut v = Vec::new();
        self.encode_into(&mut v);
        v
    }

    pub fn decode(w: &[Word]) -> Option<Inner> {
        let n16 = |x: &Word| u16::try_from(*x).ok();
        let inner = match w {
            [ENUMERATE, n] => Inner::Enumerate { next_number: n16(n)? },
            [FLOOD] => Inner::Flood,
            [ACK] => Inner::Ack,
            [COUNT, r, n, rest @ ..] if *n as usize == rest.len() => Inner::Count {
                reporter: n16(r)?,
                numbers: rest.iter().map(n16).collect::<Option<_>>()?,
            },
            [CREDIT, r, o, d] => Inner::Credit { reporter: n16(r)?, origin: n16(o)?, delta: *d },
            [DEBIT, r, o] => Inner::Debit { reporter: n16(r)?, origin: n16(o)? },
            [DONE, n] => Inner::Done { processors: n16(n)? },
            [ROUTINE] => Inner::Routine,
            _ => return None,
        };
        Some(inner)
    }
}

impl Frame {
    pub fn encode(&self) -> Vec<Word> {
        let mut v = Vec::new();
        match self {
            Frame::Boot { first, image } => {
                v.extend([BOOT, *first as Word]);
                v.extend_from_slice(image);
            }
            Frame::Probe { prober, candidate, seq } => v.extend([PROBE, *prober as Word, *candidate as Word, *seq]),
            Frame::Reply { prober, number, recv_link, fresh, seq } => {
                v.extend([REPLY, *prober as Word, *number as Word, *recv_link as Word, *fresh as Word, *seq])
            }
            Frame::Confirm { prober, number, recv_link, fresh } => {
                v.extend([CONFIRM, *prober as Word, *number as Word, *recv_link as Word, *fresh as Word])
            }
            Frame::Routed { target, inner } => {
                v.extend([ROUTED, *target as Word]);
                inner.encode_into(&mut v);
            }
            Frame::Up { inner } => {
                v.push(UP);
                inner.encode_into(&mut v);
            }
            Frame::Establish { origin, hops } => v.extend([ESTABLISH, *origin as Word, *hops]),
        }
        v
    }

    pub fn decode(w: &[Word]) -> Option<Frame> {
        let n16 = |x: &Word| u16::try_from(*x).ok();
        let link = |x: &Word| u8::try_from(*x).ok().filter(|&l| l < 4);
        let flag = |x: &Word| match x {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        };
        let frame = match w {
            [BOOT, f, image @ ..] => Frame::Boot { first: flag(f)?, image: image.to_vec() },
            [PROBE, p, c, s] => Frame::Probe { prober: n16(p)?, candidate: n16(c)?, seq: *s },
            [REPLY, p, n, l, f, s] => {
                Frame::Reply { prober: n16(p)?, number: n16(n)?, recv_link: link(l)?, fresh: flag(f)?, seq: *s }
            }
            [CONFIRM, p, n, l, f] => Frame::Confirm { prober: n16(p)?, number: n16(n)?, recv_link: link(l)?, fresh: flag(f)? },
            [ROUTED, t, inner @ ..] => Frame::Routed { target: n16(t)?, inner: Inner::decode(inner)? },
            [UP, inner @ ..] => Frame::Up { inner: Inner::decode(inner)? },
            [ESTABLISH, o, h] => Frame::Establish { origin: n16(o)?, hops: *h },
            _ => return None,
        };
        Some(frame)
    }

    /// Cheap test used by distributors, which drop boot images on booted processors.
    pub fn is_boot(w: &[Word]) -> bool {
        w.first() == Some(&BOOT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_all_kinds() {
        let frames = vec![
            Frame::Boot { first: false, image: vec![1, 2, 3] },
            Frame::Probe { prober: 8, candidate: 9, seq: 1 },
            Frame::Reply { prober: 8, number: 9, recv_link: 2, fresh: true, seq: 1 },
            Frame::Confirm { prober: 8, number: 9, recv_link: 2, fresh: false },
            Frame::Routed { target: 12, inner: Inner::Enumerate { next_number: 13 } },
            Frame::Routed { target: 9, inner: Inner::Ack },
            Frame::Routed { target: 9, inner: Inner::Flood },
            Frame::Up { inner: Inner::Count { reporter: 9, numbers: vec![10, 11] } },
            Frame::Up { inner: Inner::Credit { reporter: 9, origin: 8, delta: 3 } },
            Frame::Up { inner: Inner::Debit { reporter: 9, origin: 8 } },
            Frame::Routed { target: 8, inner: Inner::Done { processors: 4 } },
            Frame::Routed { target: 9, inner: Inner::Routine },
            Frame::Establish { origin: 8, hops: 2 },
        ];
        for f in frames {
            assert_eq!(Frame::decode(&f.encode()), Some(f));
        }
    }

    #[test]
    fn malformed_frames_rejected() {
        assert_eq!(Frame::decode(&[]), None);
        assert_eq!(Frame::decode(&[PROBE, 8, 9]), None);
        assert_eq!(Frame::decode(&[REPLY, 8, 9, 7, 1, 0]), None);
        assert_eq!(Frame::decode(&[UP, COUNT, 9, 3, 10]), None);
        assert_eq!(Frame::decode(&[ROUTED, 1 << 20, FLOOD]), None);
    }
}
