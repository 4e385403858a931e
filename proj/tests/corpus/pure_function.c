#pragma stml pure sq
float sq(float t) {
  return t * t;
}

float x[N], y[N], z[N];

for (int i = 0; i < N; i++)
  y[i] = sq(x[i]);
for (int i = 0; i < N; i++)
  z[i] = y[i] + sq(x[i] + 1);
