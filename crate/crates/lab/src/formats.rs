//! JSON files for arrow systems, cookie environments and partitions, and
//! the `n,pos` trajectory CSV.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use arrowwalk::counterexamples::{build_ce1, Ce1Left, Ce1Right};
use arrowwalk::couplings::{BlockPartition, CookieEnvironment};
use arrowwalk::{Arrow, ArrowSystem, ExplicitSystem, Trajectory};
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SystemFile {
    #[serde(rename = "explicit")]
    Explicit {
        default_fill: String,
        /// Site (as a decimal string) to its stack, bottom arrow first.
        #[serde(default)]
        stacks: BTreeMap<String, String>,
    },
    #[serde(rename = "ce1-L")]
    Ce1Left,
    #[serde(rename = "ce1-R")]
    Ce1Right {
        #[serde(rename = "N")]
        n: u64,
    },
}

/// An arrow system read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadedSystem {
    Explicit(ExplicitSystem),
    Ce1Left(Ce1Left),
    Ce1Right(Ce1Right),
}

impl ArrowSystem for LoadedSystem {
    fn arrow(&self, site: i64, level: u64) -> Arrow {
        match self {
            LoadedSystem::Explicit(s) => s.arrow(site, level),
            LoadedSystem::Ce1Left(s) => s.arrow(site, level),
            LoadedSystem::Ce1Right(s) => s.arrow(site, level),
        }
    }
}

fn single_arrow(s: &str) -> Result<Arrow> {
    let mut chars = s.chars();
    match (chars.next().and_then(Arrow::from_char), chars.next()) {
        (Some(a), None) => Ok(a),
        _ => Err(LabError::Config(format!("default_fill must be \"L\" or \"R\", got {s:?}"))),
    }
}

impl SystemFile {
    pub fn build(&self) -> Result<LoadedSystem> {
        Ok(match self {
            SystemFile::Explicit { default_fill, stacks } => {
                let mut sys = ExplicitSystem::new(single_arrow(default_fill)?);
                for (site, stack) in stacks {
                    let site: i64 =
                        site.trim().parse().map_err(|_| LabError::Config(format!("site key {site:?} is not an integer")))?;
                    sys = sys.with_stack_str(site, stack)?;
                }
                LoadedSystem::Explicit(sys)
            }
            SystemFile::Ce1Left => LoadedSystem::Ce1Left(Ce1Left),
            SystemFile::Ce1Right { n } => LoadedSystem::Ce1Right(build_ce1(*n)?.1),
        })
    }

    pub fn from_explicit(sys: &ExplicitSystem) -> SystemFile {
        SystemFile::Explicit {
            default_fill: sys.default_fill().as_char().to_string(),
            stacks: sys.stacks().iter().map(|(&x, s)| (x.to_string(), s.iter().map(|a| a.as_char()).collect())).collect(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_owned(), source })
}

pub fn parse_system(text: &str) -> Result<LoadedSystem> {
    serde_json::from_str::<SystemFile>(text)?.build()
}

pub fn load_system(path: &Path) -> Result<LoadedSystem> {
    parse_system(&read(path)?)
}

pub fn parse_env(text: &str) -> Result<CookieEnvironment> {
    let env: CookieEnvironment = serde_json::from_str(text)?;
    env.validate()?;
    Ok(env)
}

pub fn load_env(path: &Path) -> Result<CookieEnvironment> {
    parse_env(&read(path)?)
}

pub fn parse_partition(text: &str) -> Result<BlockPartition> {
    Ok(serde_json::from_str(text)?)
}

pub fn load_partition(path: &Path) -> Result<BlockPartition> {
    parse_partition(&read(path)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    n: usize,
    pos: i64,
}

pub fn write_trajectory<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for (n, &pos) in traj.positions().iter().enumerate() {
        w.serialize(Row { n, pos })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(input: R) -> Result<Trajectory> {
    let mut positions = Vec::new();
    for (i, row) in csv::Reader::from_reader(input).deserialize::<Row>().enumerate() {
        let row = row?;
        if row.n != i {
            return Err(LabError::Config(format!("trajectory row {i} has n = {}", row.n)));
        }
        positions.push(row.pos);
    }
    Ok(Trajectory::from_positions(positions)?)
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(|source| LabError::Io { path: path.to_owned(), source })?;
    read_trajectory(file)
}
