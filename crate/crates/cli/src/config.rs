//! Configuration files.
//!
//! ```text
//! # two processors joined by one link
//! processors 2
//! link 0 0 1 2
//! files ./files
//! bootrom ./boot.rom
//! capacity 8
//! max-ticks 5000000
//! trace off
//! ```
//!
//! `torus W H` is shorthand for a W×H torus. Without any topology line
//! the system is a 2×2 torus. `socket P L` makes link L of processor P
//! socket-backed; `secondary` marks a host whose processors boot over
//! their links instead of from the ROM. Relative paths are resolved
//! against the configuration file's directory.

use std::path::{Path, PathBuf};

use nopsys::fabric::{LinkSpec, Topology, TopologyError, LINKS_PER_PROCESSOR};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("{0}")]
    Topology(#[from] TopologyError),
    #[error("link {1} of processor {0} is both a socket and an internal link")]
    SocketConflict(usize, u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub processors: usize,
    pub links: Vec<LinkSpec>,
    pub sockets: Vec<(usize, u8)>,
    pub files: Option<PathBuf>,
    pub boot_rom: Option<PathBuf>,
    pub capacity: usize,
    pub max_ticks: Option<u64>,
    pub trace: bool,
    pub secondary: bool,
}

impl Default for Config {
    fn default() -> Self {
        let t = Topology::torus(2, 2);
        Config {
            processors: t.processors(),
            links: t.links().to_vec(),
            sockets: Vec::new(),
            files: None,
            boot_rom: None,
            capacity: 8,
            max_ticks: None,
            trace: false,
            secondary: false,
        }
    }
}

fn number<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T, ConfigError> {
    field.parse().map_err(|_| ConfigError::Line(line, format!("{what} must be a number, not {field:?}")))
}

fn link_index(line: usize, field: &str) -> Result<u8, ConfigError> {
    let l: u8 = number(line, field, "link index")?;
    if (l as usize) < LINKS_PER_PROCESSOR {
        Ok(l)
    } else {
        Err(ConfigError::Line(line, format!("link index {l} outside 0..{LINKS_PER_PROCESSOR}")))
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        let mut explicit_topology = false;
        let set_topology = |c: &mut Config, explicit: &mut bool, t: Topology| {
            if !*explicit {
                c.links.clear();
            }
            *explicit = true;
            c.processors = t.processors();
            c.links.extend_from_slice(t.links());
        };
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || ConfigError::Line(n, format!("cannot understand {line:?}"));
            match f.as_slice() {
                ["processors", p] => {
                    let p: usize = number(n, p, "processor count")?;
                    set_topology(&mut c, &mut explicit_topology, Topology::new(p, Vec::new())?);
                }
                ["torus", w, h] => {
                    let (w, h): (usize, usize) = (number(n, w, "width")?, number(n, h, "height")?);
                    if w == 0 || h == 0 {
                        return Err(ConfigError::Line(n, "torus sides must be positive".into()));
                    }
                    set_topology(&mut c, &mut explicit_topology, Topology::torus(w, h));
                }
                ["link", a, la, b, lb] => {
                    if !explicit_topology {
                        return Err(ConfigError::Line(n, "link before processors".into()));
                    }
                    c.links.push(LinkSpec {
                        a: number(n, a, "processor")?,
                        a_link: link_index(n, la)?,
                        b: number(n, b, "processor")?,
                        b_link: link_index(n, lb)?,
                    });
                }
                ["socket", p, l] => c.sockets.push((number(n, p, "processor")?, link_index(n, l)?)),
                ["files", dir] => c.files = Some(base.join(dir)),
                ["bootrom", rom] => c.boot_rom = Some(base.join(rom)),
                ["capacity", k] => {
                    c.capacity = number(n, k, "capacity")?;
                    if c.capacity == 0 {
                        return Err(ConfigError::Line(n, "capacity must be positive".into()));
                    }
                }
                ["max-ticks", k] => c.max_ticks = Some(number(n, k, "tick limit")?),
                ["trace", "on"] => c.trace = true,
                ["trace", "off"] => c.trace = false,
                ["secondary"] => c.secondary = true,
                _ => return Err(bad()),
            }
        }
        let topology = c.topology()?;
        for &(p, l) in &c.sockets {
            if p >= topology.processors() {
                return Err(TopologyError::NoSuchProcessor(p, topology.processors()).into());
            }
            if topology.peers()[p][l as usize].is_some() {
                return Err(ConfigError::SocketConflict(p, l));
            }
        }
        Ok(c)
    }

    pub fn topology(&self) -> Result<Topology, TopologyError> {
        Topology::new(self.processors, self.links.clone())
    }
}
