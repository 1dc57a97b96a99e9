//! MAVLink v1 SET_POSITION_TARGET_LOCAL_NED framing for body-frame velocity
//! commands, with a decoder and simple frame sinks.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::net::{ToSocketAddrs, UdpSocket};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::tracker::VelocityCommand;

pub const MAGIC: u8 = 0xFE;
pub const MSG_ID: u8 = 84;
pub const CRC_EXTRA: u8 = 143;
pub const PAYLOAD_LEN: usize = 53;
pub const FRAME_LEN: usize = 6 + PAYLOAD_LEN + 2;
pub const FRAME_BODY_OFFSET_NED: u8 = 9;

pub const IGNORE_X: u16 = 1 << 0;
pub const IGNORE_Y: u16 = 1 << 1;
pub const IGNORE_Z: u16 = 1 << 2;
pub const IGNORE_VX: u16 = 1 << 3;
pub const IGNORE_VY: u16 = 1 << 4;
pub const IGNORE_VZ: u16 = 1 << 5;
pub const IGNORE_AFX: u16 = 1 << 6;
pub const IGNORE_AFY: u16 = 1 << 7;
pub const IGNORE_AFZ: u16 = 1 << 8;
pub const IGNORE_YAW: u16 = 1 << 10;
pub const IGNORE_YAW_RATE: u16 = 1 << 11;

pub const VELOCITY_IGNORE_BITS: u16 = IGNORE_VX | IGNORE_VY | IGNORE_VZ;
/// Everything but velocity ignored: 0x0DC7.
pub const VELOCITY_ONLY_MASK: u16 =
    IGNORE_X | IGNORE_Y | IGNORE_Z | IGNORE_AFX | IGNORE_AFY | IGNORE_AFZ | IGNORE_YAW | IGNORE_YAW_RATE;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad start byte 0x{0:02x}")]
    BadMagic(u8),
    #[error("bad frame length: got {got} bytes, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("checksum mismatch: frame carries 0x{found:04x}, computed 0x{computed:04x}")]
    BadCrc { found: u16, computed: u16 },
    #[error("unexpected message id {0}")]
    WrongMsgId(u8),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("velocity component {axis} is not finite ({value})")]
pub struct NonFiniteVelocity {
    pub axis: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LinkIds {
    pub sysid: u8,
    pub compid: u8,
    pub target_system: u8,
    pub target_component: u8,
}

impl LinkIds {
    /// Companion computer talking to autopilot 1/1.
    pub const COMPANION: LinkIds = LinkIds {
        sysid: 1,
        compid: 191,
        target_system: 1,
        target_component: 1,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityTargetMessage {
    pub time_boot_ms: u32,
    pub target_system: u8,
    pub target_component: u8,
    pub coordinate_frame: u8,
    pub type_mask: u16,
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub vx: f32,
    pub vy: f32,
    pub vz: f32,
    pub afx: f32,
    pub afy: f32,
    pub afz: f32,
    pub yaw: f32,
    pub yaw_rate: f32,
}

/// Decoded frame header plus message.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedFrame {
    pub seq: u8,
    pub sysid: u8,
    pub compid: u8,
    pub message: VelocityTargetMessage,
}

pub fn build_velocity_message(
    cmd: &VelocityCommand,
    ids: &LinkIds,
    time_boot_ms: u32,
) -> Result<VelocityTargetMessage, NonFiniteVelocity> {
    for (axis, value) in [("vx", cmd.vx), ("vy", cmd.vy), ("vz", cmd.vz)] {
        if !value.is_finite() {
            return Err(NonFiniteVelocity { axis, value });
        }
    }
    Ok(VelocityTargetMessage {
        time_boot_ms,
        target_system: ids.target_system,
        target_component: ids.target_component,
        coordinate_frame: FRAME_BODY_OFFSET_NED,
        type_mask: VELOCITY_ONLY_MASK,
        x: 0.0,
        y: 0.0,
        z: 0.0,
        vx: cmd.vx as f32,
        vy: cmd.vy as f32,
        vz: cmd.vz as f32,
        afx: 0.0,
        afy: 0.0,
        afz: 0.0,
        yaw: 0.0,
        yaw_rate: 0.0,
    })
}

/// One byte of the X.25 (CRC-16/MCRF4XX) checksum.
pub fn crc_accumulate(byte: u8, crc: u16) -> u16 {
    let mut tmp = byte ^ (crc & 0xFF) as u8;
    tmp ^= tmp << 4;
    let tmp = tmp as u16;
    (crc >> 8) ^ (tmp << 8) ^ (tmp << 3) ^ (tmp >> 4)
}

pub fn crc_x25(bytes: &[u8]) -> u16 {
    bytes.iter().fold(0xFFFF, |crc, &b| crc_accumulate(b, crc))
}

fn frame_crc(frame: &[u8]) -> u16 {
    crc_accumulate(CRC_EXTRA, crc_x25(&frame[1..6 + PAYLOAD_LEN]))
}

pub fn encode_payload(m: &VelocityTargetMessage) -> [u8; PAYLOAD_LEN] {
    let mut p = [0u8; PAYLOAD_LEN];
    p[0..4].copy_from_slice(&m.time_boot_ms.to_le_bytes());
    let floats = [m.x, m.y, m.z, m.vx, m.vy, m.vz, m.afx, m.afy, m.afz, m.yaw, m.yaw_rate];
    for (i, f) in floats.iter().enumerate() {
        p[4 + 4 * i..8 + 4 * i].copy_from_slice(&f.to_le_bytes());
    }
    p[48..50].copy_from_slice(&m.type_mask.to_le_bytes());
    p[50] = m.target_system;
    p[51] = m.target_component;
    p[52] = m.coordinate_frame;
    p
}

fn decode_payload(p: &[u8]) -> VelocityTargetMessage {
    let f = |i: usize| f32::from_le_bytes(p[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes"));
    VelocityTargetMessage {
        time_boot_ms: u32::from_le_bytes(p[0..4].try_into().expect("4 bytes")),
        x: f(0),
        y: f(1),
        z: f(2),
        vx: f(3),
        vy: f(4),
        vz: f(5),
        afx: f(6),
        afy: f(7),
        afz: f(8),
        yaw: f(9),
        yaw_rate: f(10),
        type_mask: u16::from_le_bytes([p[48], p[49]]),
        target_system: p[50],
        target_component: p[51],
        coordinate_frame: p[52],
    }
}

pub fn encode_frame(m: &VelocityTargetMessage, seq: u8, sysid: u8, compid: u8) -> [u8; FRAME_LEN] {
    let mut out = [0u8; FRAME_LEN];
    out[..6].copy_from_slice(&[MAGIC, PAYLOAD_LEN as u8, seq, sysid, compid, MSG_ID]);
    out[6..6 + PAYLOAD_LEN].copy_from_slice(&encode_payload(m));
    let crc = frame_crc(&out);
    out[6 + PAYLOAD_LEN..].copy_from_slice(&crc.to_le_bytes());
    out
}

pub fn decode_frame(bytes: &[u8]) -> Result<DecodedFrame, FrameError> {
    match bytes.first() {
        Some(&MAGIC) => {}
        Some(&b) => return Err(FrameError::BadMagic(b)),
        None => {
            return Err(FrameError::BadLength {
                got: 0,
                expected: FRAME_LEN,
            })
        }
    }
    if bytes.len() != FRAME_LEN || bytes[1] as usize != PAYLOAD_LEN {
        return Err(FrameError::BadLength {
            got: bytes.len(),
            expected: FRAME_LEN,
        });
    }
    let found = u16::from_le_bytes([bytes[FRAME_LEN - 2], bytes[FRAME_LEN - 1]]);
    let computed = frame_crc(bytes);
    if found != computed {
        return Err(FrameError::BadCrc { found, computed });
    }
    if bytes[5] != MSG_ID {
        return Err(FrameError::WrongMsgId(bytes[5]));
    }
    Ok(DecodedFrame {
        seq: bytes[2],
        sysid: bytes[3],
        compid: bytes[4],
        message: decode_payload(&bytes[6..6 + PAYLOAD_LEN]),
    })
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Error)]
#[error("{dest}: {source}")]
pub struct SinkError {
    pub dest: String,
    #[source]
    pub source: io::Error,
}

/// Where frames go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkTarget {
    File(PathBuf),
    /// `host:port`
    Udp(String),
    Memory,
}

impl SinkTarget {
    /// `udp://host:port` selects UDP, `mem:` an in-memory buffer, anything
    /// else is a file path.
    pub fn parse(desc: &str) -> SinkTarget {
        if let Some(addr) = desc.strip_prefix("udp://") {
            SinkTarget::Udp(addr.to_owned())
        } else if desc == "mem:" {
            SinkTarget::Memory
        } else {
            SinkTarget::File(PathBuf::from(desc))
        }
    }
}

enum Channel {
    File(File),
    Udp(UdpSocket),
    Memory(Vec<u8>),
}

/// Single-writer frame sink. Each `send` stamps the next sequence number,
/// wrapping after 255.
pub struct CommandSink {
    channel: Channel,
    dest: String,
    ids: LinkIds,
    next_seq: u8,
}

impl CommandSink {
    pub fn open(target: &SinkTarget, ids: LinkIds) -> Result<Self, SinkError> {
        let (channel, dest) = match target {
            SinkTarget::File(path) => (Channel::File(open_append(path)?), path.display().to_string()),
            SinkTarget::Udp(addr) => {
                let dest = format!("udp://{addr}");
                let wrap = |source| SinkError {
                    dest: dest.clone(),
                    source,
                };
                let remote = addr
                    .to_socket_addrs()
                    .map_err(wrap)?
                    .next()
                    .ok_or_else(|| wrap(io::Error::new(io::ErrorKind::NotFound, "no address")))?;
                let local = if remote.is_ipv4() { "0.0.0.0:0" } else { "[::]:0" };
                let sock = UdpSocket::bind(local).map_err(wrap)?;
                sock.connect(remote).map_err(wrap)?;
                (Channel::Udp(sock), dest)
            }
            SinkTarget::Memory => (Channel::Memory(Vec::new()), "mem:".to_owned()),
        };
        Ok(Self {
            channel,
            dest,
            ids,
            next_seq: 0,
        })
    }

    pub fn memory(ids: LinkIds) -> Self {
        Self {
            channel: Channel::Memory(Vec::new()),
            dest: "mem:".to_owned(),
            ids,
            next_seq: 0,
        }
    }

    pub fn next_seq(&self) -> u8 {
        self.next_seq
    }

    pub fn set_next_seq(&mut self, seq: u8) {
        self.next_seq = seq;
    }

    pub fn ids(&self) -> LinkIds {
        self.ids
    }

    /// Frames and writes `m`; returns the frame sent.
    pub fn send(&mut self, m: &VelocityTargetMessage) -> Result<[u8; FRAME_LEN], SinkError> {
        let frame = encode_frame(m, self.next_seq, self.ids.sysid, self.ids.compid);
        let res = match &mut self.channel {
            Channel::File(f) => f.write_all(&frame),
            Channel::Udp(s) => s.send(&frame).and_then(|n| {
                if n == frame.len() {
                    Ok(())
                } else {
                    Err(io::Error::new(io::ErrorKind::WriteZero, "short datagram"))
                }
            }),
            Channel::Memory(buf) => {
                buf.extend_from_slice(&frame);
                Ok(())
            }
        };
        res.map_err(|source| SinkError {
            dest: self.dest.clone(),
            source,
        })?;
        self.next_seq = self.next_seq.wrapping_add(1);
        Ok(frame)
    }

    pub fn flush(&mut self) -> Result<(), SinkError> {
        if let Channel::File(f) = &mut self.channel {
            f.flush().map_err(|source| SinkError {
                dest: self.dest.clone(),
                source,
            })?;
        }
        Ok(())
    }

    /// Bytes written so far, for memory sinks.
    pub fn buffer(&self) -> Option<&[u8]> {
        match &self.channel {
            Channel::Memory(buf) => Some(buf),
            _ => None,
        }
    }
}

fn open_append(path: &Path) -> Result<File, SinkError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| SinkError {
            dest: path.display().to_string(),
            source,
        })
}
