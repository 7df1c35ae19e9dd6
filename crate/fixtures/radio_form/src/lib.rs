//! A form holding one group of radio buttons that can be saved to and
//! reloaded from a small text file.

use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioButton {
    name: String,
    options: Vec<String>,
    selected: Option<usize>,
}

impl RadioButton {
    pub fn new(name: &str, options: &[&str]) -> RadioButton {
        RadioButton {
            name: name.to_owned(),
            options: options.iter().map(|o| o.to_string()).collect(),
            selected: None,
        }
    }

    /// Selects the option whose export value is `value`; any other value
    /// clears the selection.
    pub fn select_option(&mut self, value: &str) {
        self.selected = self.options.iter().position(|o| o == value);
    }

    /// The selected export value, or `Off` when nothing is selected.
    pub fn value(&self) -> String {
        match self.selected {
            Some(i) => self.options[i].clone(),
            None => "Off".to_owned(),
        }
    }

    pub fn selected_export_values(&self) -> Vec<String> {
        self.selected.map(|i| vec![self.options[i].clone()]).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    radio: RadioButton,
}

impl Form {
    pub fn radio_button(&self) -> &RadioButton {
        &self.radio
    }

    pub fn radio_button_mut(&mut self) -> &mut RadioButton {
        &mut self.radio
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let selected = match self.radio.selected {
            Some(i) => i.to_string(),
            None => "-".to_owned(),
        };
        let text = format!("{}\n{}\n{}\n", self.radio.name, self.radio.options.join(","), selected);
        fs::write(path, text)
    }

    pub fn load(path: &Path) -> io::Result<Form> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let bad = || io::Error::new(io::ErrorKind::InvalidData, "malformed form file");
        let name = lines.next().ok_or_else(bad)?.to_owned();
        let options = lines.next().ok_or_else(bad)?.split(',').map(str::to_owned).collect();
        let selected = match lines.next().ok_or_else(bad)? {
            "-" => None,
            index => Some(index.parse().map_err(|_| bad())?),
        };
        Ok(Form {
            radio: RadioButton {
                name,
                options,
                selected,
            },
        })
    }
}

/// A form with the radio group `MyRadioButton` offering options `b` and `c`.
pub fn sample_form() -> Form {
    Form {
        radio: RadioButton::new("MyRadioButton", &["b", "c"]),
    }
}
