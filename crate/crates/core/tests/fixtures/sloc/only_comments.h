// a
// b
/* c */
