int k;
float s, t, x[N];

s = 0;
t = 0;
k = 0;
while (k < N) {
  if (x[k] > 0)
    s += x[k];
  else
    t += x[k] * x[k];
  k++;
}
