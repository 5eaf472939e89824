//! `extract`: wordlists in, character matrices plus a manifest out.

use std::path::PathBuf;

use serde::Serialize;

use phonosig::chars::{
    backward_transition_matrix, binary_biphone_matrix, class_transition_matrix,
    forward_transition_matrix, inventory, read_class_maps, read_wordlists, CharacterMatrix,
    ClassMapSet, Direction, Scheme,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Binary,
    Fwd,
    Bwd,
    ClassFwd,
    ClassBwd,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, CliError> {
        match s {
            "binary" => Ok(Mode::Binary),
            "fwd" => Ok(Mode::Fwd),
            "bwd" => Ok(Mode::Bwd),
            "class-fwd" => Ok(Mode::ClassFwd),
            "class-bwd" => Ok(Mode::ClassBwd),
            other => Err(CliError::Input(format!(
                "unknown mode {other:?} (expected binary, fwd, bwd, class-fwd, class-bwd)"
            ))),
        }
    }

    pub fn needs_classmap(self) -> bool {
        matches!(self, Mode::ClassFwd | Mode::ClassBwd)
    }

    fn as_str(self) -> &'static str {
        match self {
            Mode::Binary => "binary",
            Mode::Fwd => "fwd",
            Mode::Bwd => "bwd",
            Mode::ClassFwd => "class-fwd",
            Mode::ClassBwd => "class-bwd",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub wordlists: PathBuf,
    pub classmap: Option<PathBuf>,
    pub modes: Vec<Mode>,
    pub schemes: Vec<Scheme>,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct Manifest {
    n_doculects: usize,
    duplicate_rows_dropped: usize,
    doculects: Vec<DoculectInfo>,
    matrices: Vec<MatrixInfo>,
}

#[derive(Serialize)]
struct DoculectInfo {
    id: String,
    n_forms: usize,
    inventory_size: usize,
}

#[derive(Serialize)]
struct MatrixInfo {
    file: String,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    scheme: Option<String>,
    n_characters: usize,
}

pub fn cmd_extract(cfg: &ExtractConfig) -> Result<(), CliError> {
    // All validation and computation happens before the first byte is
    // written, so a failure never leaves partial output behind.
    let needs_classes = cfg.modes.iter().any(|m| m.needs_classmap());
    let class_maps: Option<ClassMapSet> = match (&cfg.classmap, needs_classes) {
        (Some(path), _) => Some(
            read_class_maps(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        ),
        (None, true) => {
            return Err(CliError::Input(
                "class modes requested but no --classmap given".to_string(),
            ))
        }
        (None, false) => None,
    };

    let data = read_wordlists(&cfg.wordlists)
        .map_err(|e| CliError::Input(format!("{}: {e}", cfg.wordlists.display())))?;

    let mut outputs: Vec<(String, String, Option<String>, CharacterMatrix)> = Vec::new();
    for &mode in &cfg.modes {
        match mode {
            Mode::Binary => outputs.push((
                "binary.csv".into(),
                mode.as_str().into(),
                None,
                binary_biphone_matrix(&data.doculects),
            )),
            Mode::Fwd => outputs.push((
                "fwd.csv".into(),
                mode.as_str().into(),
                None,
                forward_transition_matrix(&data.doculects),
            )),
            Mode::Bwd => outputs.push((
                "bwd.csv".into(),
                mode.as_str().into(),
                None,
                backward_transition_matrix(&data.doculects),
            )),
            Mode::ClassFwd | Mode::ClassBwd => {
                let maps = class_maps.as_ref().expect("validated above");
                let direction = if mode == Mode::ClassFwd {
                    Direction::Forward
                } else {
                    Direction::Backward
                };
                for &scheme in &cfg.schemes {
                    let m = class_transition_matrix(&data.doculects, maps.get(scheme), direction)
                        .map_err(CliError::input)?;
                    outputs.push((
                        format!("{}_{}.csv", mode.as_str().replace('-', "_"), scheme.name()),
                        mode.as_str().into(),
                        Some(scheme.name().to_string()),
                        m,
                    ));
                }
            }
        }
    }

    let manifest = Manifest {
        n_doculects: data.doculects.len(),
        duplicate_rows_dropped: data.duplicate_rows_dropped,
        doculects: data
            .doculects
            .iter()
            .map(|d| DoculectInfo {
                id: d.id.clone(),
                n_forms: d.forms.len(),
                inventory_size: inventory(d).len(),
            })
            .collect(),
        matrices: outputs
            .iter()
            .map(|(file, mode, scheme, m)| MatrixInfo {
                file: file.clone(),
                mode: mode.clone(),
                scheme: scheme.clone(),
                n_characters: m.n_characters(),
            })
            .collect(),
    };

    std::fs::create_dir_all(&cfg.out_dir)?;
    for (file, _, _, matrix) in &outputs {
        let mut buf = Vec::new();
        matrix.write_csv(&mut buf).map_err(CliError::input)?;
        std::fs::write(cfg.out_dir.join(file), buf)?;
    }
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(cfg.out_dir.join("manifest.json"), manifest_json + "\n")?;
    Ok(())
}
