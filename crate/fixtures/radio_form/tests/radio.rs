use std::fs;
use std::path::Path;

use radio_form::Form;

#[test]
fn test_radio_buttons() {
    let pdf2 = Path::new("radio-btns-mod.txt");
    let _ = fs::remove_file(pdf2);
    let mut form1 = radio_form::sample_form();
    let radio_button1 = form1.radio_button_mut();
    radio_button1.select_option("b");
    form1.save(pdf2).unwrap();

    let form2 = Form::load(pdf2).unwrap();
    let radio_button2 = form2.radio_button();
    assert_eq!("b", radio_button2.value());
    assert_eq!(1, radio_button2.selected_export_values().len());
    drop(form2);
}
