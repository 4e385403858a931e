float a[N], b[N];

for (int i = 1; i < N; i++)
  a[i] = b[i - 1];
for (int i = 1; i < N; i++)
  b[i] = 0;
