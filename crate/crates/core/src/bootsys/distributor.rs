//! Link distribution process: one per external link.
//!
//! Port 0 takes frames to transmit on the link. Frames received from the
//! link are handed to the boot process, except boot images, which a booted
//! processor drops.

use super::frame::Frame;
use super::{boot_frame_port, LINK_FRAME_PORT};
use crate::fabric::{Cx, Token, Word};
use crate::runtime::{Behavior, Outbox, Step, StepResult};

pub struct Distributor {
    link: u8,
    incoming: Vec<Word>,
    out: Outbox,
    prefer_link: bool,
    pub frames_forwarded: u64,
}

impl Distributor {
    pub fn new(link: u8) -> Self {
        Distributor {
            link,
            incoming: Vec::new(),
            out: Outbox::new(1),
            prefer_link: false,
            frames_forwarded: 0,
        }
    }

    fn from_boot(&mut self, cx: &mut Cx<'_>) -> StepResult {
        match cx.recv(LINK_FRAME_PORT) {
            Some(t) => {
                cx.link_send(self.link, t)?;
                Ok(Step::Busy)
            }
            None => Ok(Step::Idle),
        }
    }

    fn from_link(&mut self, cx: &mut Cx<'_>) -> StepResult {
        match cx.link_recv(self.link)? {
            Some(Token::Data(w)) => self.incoming.push(w),
            Some(Token::End) => {
                let frame = std::mem::take(&mut self.incoming);
                if Frame::is_boot(&frame) {
                    cx.boot_discarded(self.link);
                } else {
                    self.frames_forwarded += 1;
                    self.out.push(boot_frame_port(self.link), frame);
                }
            }
            None => return Ok(Step::Idle),
        }
        Ok(Step::Busy)
    }
}

impl Behavior for Distributor {
    fn name(&self) -> &str {
        "distribute"
    }

    fn port_count(&self) -> u16 {
        2
    }

    fn privileged_only_ports(&self) -> &'static [u16] {
        &[LINK_FRAME_PORT]
    }

    fn step(&mut self, cx: &mut Cx<'_>) -> StepResult {
        let sent = self.out.pump(cx)?;
        self.prefer_link = !self.prefer_link;
        let r = if self.prefer_link {
            match self.from_link(cx)? {
                Step::Idle => self.from_boot(cx)?,
                s => s,
            }
        } else {
            match self.from_boot(cx)? {
                Step::Idle => self.from_link(cx)?,
                s => s,
            }
        };
        Ok(if sent { Step::Busy } else { r })
    }
}
