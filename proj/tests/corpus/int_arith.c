int g[N], h[N], m, q;

for (int i = 0; i < N; i++)
  h[i] = g[i] % 7 + m / 3;
for (int i = 0; i < N; i++)
  h[i] += q - i;
q += m * 2;
