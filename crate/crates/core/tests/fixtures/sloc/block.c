/*
 * header comment
 */
int x = 1; /* trailing */
/* a */ int y = 2;
/* one */ /* two */

int z;
