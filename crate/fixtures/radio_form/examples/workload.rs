//! Drives the form the way an end user would, trying every choice a UI
//! might send.

fn main() {
    let choices = ["Yes", "Off", "a", "b", "c", "d", "e", "B", "on", "", "1", " b", "c"];
    let mut form = radio_form::sample_form();
    let mut accepted = 0;
    for choice in choices {
        let radio = form.radio_button_mut();
        radio.select_option(choice);
        if !radio.selected_export_values().is_empty() {
            accepted += 1;
        }
    }
    println!("{accepted} of {} choices selected an option", choices.len());
}
