/* outer /* inner */ still comment */
fn main() {}
/* open
   /* nested */
   still */
let x = 1;
