// placeholder
pub struct Placeholder;
