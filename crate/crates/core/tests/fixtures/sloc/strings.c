const char *a = "/* not a comment */";
const char *b = "// nor this";
// real comment with "quotes"
char c = '"';
