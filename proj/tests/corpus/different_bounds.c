float p[N], q[N];

for (int i = 0; i < N; i++)
  p[i] = q[i] + 1;
for (int i = 1; i < N; i++)
  q[i] = p[i - 1];
