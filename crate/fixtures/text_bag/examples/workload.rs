//! Imports a handful of metadata packets and renders them at several scales.

use text_bag::{create_text, Bag, Schema};

const DC: &str = "http://purl.org/dc/elements/1.1/";
const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

fn main() {
    let properties = [
        create_text(Some(DC), "dc", "li", "valueOne"),
        create_text(None, "rdf", "li", "Creator"),
        create_text(Some(RDF), "rdf", "li", ""),
        create_text(None, "dc", "title", "Report"),
        create_text(Some(DC), "dc", "creator", "Ann"),
        create_text(None, "rdf", "Description", "x"),
        create_text(None, "xmp", "CreateDate", "2020-01-01"),
        create_text(Some(""), "", "", ""),
        create_text(None, "rdf", "LI", "valueOne"),
    ];
    let mut bag = Bag::new();
    let added = properties.into_iter().filter(|p| bag.add(p.clone())).count();

    let mut schema = Schema::new();
    let scales = [
        1.5,
        2.0,
        0.0,
        -0.0,
        -1.0,
        f64::NAN,
        0.5,
        f64::from_bits(0x7ff8_0000_0000_0001),
    ];
    let mut shown = 0;
    for s in scales {
        schema.set_scale(s);
        if schema.scale() > 0.0 {
            shown += 1;
        }
    }
    schema.add_bag(bag);
    println!("{added} bag items, {shown} positive scales, {} bags", schema.bag_count());
}
