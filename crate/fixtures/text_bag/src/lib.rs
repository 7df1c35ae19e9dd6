//! Metadata schemas holding unordered bags of text properties.

/// One text property, e.g. `rdf:li = "valueOne"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextProperty {
    pub namespace: Option<String>,
    pub prefix: String,
    pub name: String,
    pub value: String,
}

pub fn create_text(namespace: Option<&str>, prefix: &str, name: &str, value: &str) -> TextProperty {
    TextProperty {
        namespace: namespace.map(str::to_owned),
        prefix: prefix.to_owned(),
        name: name.to_owned(),
        value: value.to_owned(),
    }
}

/// An unordered array; only `li` items belong in it.
#[derive(Debug, Default)]
pub struct Bag {
    items: Vec<TextProperty>,
}

impl Bag {
    pub fn new() -> Bag {
        Bag::default()
    }

    /// Adds `item` if it is a list item; other properties are ignored.
    pub fn add(&mut self, item: TextProperty) -> bool {
        if item.name != "li" {
            return false;
        }
        self.items.push(item);
        true
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn values(&self) -> Vec<String> {
        self.items.iter().map(|i| i.value.clone()).collect()
    }
}

/// A schema with a display scale applied to its rendered values.
#[derive(Debug)]
pub struct Schema {
    scale: f64,
    bags: Vec<Bag>,
}

impl Default for Schema {
    fn default() -> Self {
        Schema::new()
    }
}

impl Schema {
    pub fn new() -> Schema {
        Schema {
            scale: 1.0,
            bags: Vec::new(),
        }
    }

    pub fn set_scale(&mut self, scale: f64) {
        self.scale = scale;
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn add_bag(&mut self, bag: Bag) {
        self.bags.push(bag);
    }

    pub fn bag_count(&self) -> usize {
        self.bags.len()
    }
}
