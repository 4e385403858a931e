float t, a, b, c, d;

t = a + b;
d = t * 2;
t = t + c;
