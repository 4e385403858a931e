float x, y, a, b, c;

x = a * b;
y = c + 1;
x = x + y;
