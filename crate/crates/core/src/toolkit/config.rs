use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::GaussianScale;
use crate::tagger::TaggerConfig;
use crate::training::TrainConfig;

/// Every key a configuration file may set, with its default.
pub const CONFIG_KEYS: [(&str, &str); 19] = [
    ("layers", "7"),
    ("hidden", "512"),
    ("variant", "ToOutputGated"),
    ("gate_inputs", "prev_and_skip"),
    ("gate_bias", "false"),
    ("window", "3"),
    ("word_dim", "200"),
    ("char_dim", "5"),
    ("cap_dim", "5"),
    ("forget_bias", "0"),
    ("dropout_embed", "0.25"),
    ("dropout_hidden", "0.5"),
    ("init_scale", "variance"),
    ("min_count", "1"),
    ("seed", "1"),
    ("learning_rate", "0.02"),
    ("epochs", "20"),
    ("train_seed", "1"),
    ("eval_every", "1"),
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: Display,
{
    raw.parse().map_err(|e: T::Err| Error::ConfigValue {
        key: key.to_string(),
        msg: format!("`{raw}`: {e}"),
    })
}

fn set(tagger: &mut TaggerConfig, train: &mut TrainConfig, key: &str, raw: &str) -> Result<()> {
    match key {
        "layers" => tagger.layers = value(key, raw)?,
        "hidden" => tagger.hidden = value(key, raw)?,
        "variant" => tagger.variant = value(key, raw)?,
        "gate_inputs" => tagger.gate_inputs = value(key, raw)?,
        "gate_bias" => tagger.gate_bias = value(key, raw)?,
        "window" => tagger.window = value(key, raw)?,
        "word_dim" => tagger.word_dim = value(key, raw)?,
        "char_dim" => tagger.char_dim = value(key, raw)?,
        "cap_dim" => tagger.cap_dim = value(key, raw)?,
        "forget_bias" => tagger.forget_bias = value(key, raw)?,
        "dropout_embed" => tagger.dropout_embed = value(key, raw)?,
        "dropout_hidden" => tagger.dropout_hidden = value(key, raw)?,
        "init_scale" => {
            tagger.init_scale = GaussianScale::parse(raw).ok_or_else(|| Error::ConfigValue {
                key: key.to_string(),
                msg: format!("`{raw}`: expected `variance` or `stddev`"),
            })?
        }
        "min_count" => tagger.min_count = value(key, raw)?,
        "seed" => tagger.seed = value(key, raw)?,
        "learning_rate" => train.learning_rate = value(key, raw)?,
        "epochs" => train.epochs = value(key, raw)?,
        "train_seed" => train.seed = value(key, raw)?,
        "eval_every" => train.eval_every = value(key, raw)?,
        _ => {
            return Err(Error::ConfigValue {
                key: key.to_string(),
                msg: "unknown key".into(),
            })
        }
    }
    Ok(())
}

/// Parses `key=value` lines (blank lines and `#` comments allowed) on top of
/// the defaults in [`CONFIG_KEYS`], then validates the result.
pub fn parse_config(text: &str, path: &Path) -> Result<(TaggerConfig, TrainConfig)> {
    let mut tagger = TaggerConfig::default();
    let mut train = TrainConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, raw)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "expected `key=value`".into(),
            });
        };
        set(&mut tagger, &mut train, key.trim(), raw.trim())?;
    }
    tagger.validate()?;
    train.validate()?;
    Ok((tagger, train))
}

pub fn load_config(path: &Path) -> Result<(TaggerConfig, TrainConfig)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// The architecture keys of `config` in [`CONFIG_KEYS`] order. Reals are
/// written in their shortest round-trip form.
pub fn tagger_config_text(config: &TaggerConfig) -> String {
    let c = config;
    [
        ("layers", c.layers.to_string()),
        ("hidden", c.hidden.to_string()),
        ("variant", c.variant.to_string()),
        ("gate_inputs", c.gate_inputs.name().to_string()),
        ("gate_bias", c.gate_bias.to_string()),
        ("window", c.window.to_string()),
        ("word_dim", c.word_dim.to_string()),
        ("char_dim", c.char_dim.to_string()),
        ("cap_dim", c.cap_dim.to_string()),
        ("forget_bias", c.forget_bias.to_string()),
        ("dropout_embed", c.dropout_embed.to_string()),
        ("dropout_hidden", c.dropout_hidden.to_string()),
        ("init_scale", c.init_scale.name().to_string()),
        ("min_count", c.min_count.to_string()),
        ("seed", c.seed.to_string()),
    ]
    .iter()
    .map(|(k, v)| format!("{k}={v}\n"))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrent::SkipVariant;

    fn parse(text: &str) -> Result<(TaggerConfig, TrainConfig)> {
        parse_config(text, Path::new("c.cfg"))
    }

    #[test]
    fn empty_file_gives_documented_defaults() {
        let (t, r) = parse("").unwrap();
        assert_eq!(
            (t.layers, t.hidden, t.window, t.forget_bias),
            (7, 512, 3, 0.0)
        );
        assert_eq!(r.learning_rate, 0.02);
        let mut documented = String::new();
        for (k, v) in CONFIG_KEYS {
            documented.push_str(&format!("{k}={v}\n"));
        }
        assert_eq!(parse(&documented).unwrap(), (t, r));
    }

    #[test]
    fn values_and_errors() {
        let (t, _) = parse("# comment\nvariant=ToOutputGated\n\nlayers = 3\n").unwrap();
        assert_eq!((t.variant, t.layers), (SkipVariant::ToOutputGated, 3));
        for v in SkipVariant::ALL {
            assert_eq!(parse(&format!("variant={v}")).unwrap().0.variant, v);
        }
        match parse("variannt=x") {
            Err(Error::ConfigValue { key, .. }) => assert_eq!(key, "variannt"),
            other => panic!("{other:?}"),
        }
        match parse("hidden=lots") {
            Err(Error::ConfigValue { key, .. }) => assert_eq!(key, "hidden"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("layers 3"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse("learning_rate=0").is_err());
        assert!(parse("window=4").is_err());
        assert!(parse("variant=Skip").is_err());
    }

    #[test]
    fn architecture_text_round_trips() {
        let config = TaggerConfig {
            forget_bias: 0.1 + 0.2,
            dropout_embed: 1.0 / 3.0,
            variant: SkipVariant::ToInternalGated,
            gate_bias: true,
            ..TaggerConfig::toy()
        };
        let (back, _) = parse(&tagger_config_text(&config)).unwrap();
        assert_eq!(back, config);
    }
}
