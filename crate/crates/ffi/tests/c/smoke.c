#include <stdio.h>
#include <string.h>

#include "evsync.h"

#define CHECK(cond)                                                       \
    do {                                                                  \
        if (!(cond)) {                                                    \
            const char *m = evs_last_error_message();                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    m ? m : "no message");                                \
            return 1;                                                     \
        }                                                                 \
    } while (0)

int main(void) {
    const char csv[] = "width=4,height=4\n0,0,10,1\n3,3,20,-1\n";
    EvsEventStream *s = NULL;
    CHECK(evs_events_parse_csv((const uint8_t *)csv, strlen(csv), &s) == EVS_STATUS_OK);
    CHECK(evs_events_len(s) == 2);

    uint8_t *buf = NULL;
    size_t len = 0;
    CHECK(evs_events_write_binary(s, &buf, &len) == EVS_STATUS_OK);
    CHECK(len == 16 + 2 * 13);
    EvsEventStream *back = NULL;
    CHECK(evs_events_parse_binary(buf, len, &back) == EVS_STATUS_OK);
    evs_buffer_free(buf, len);

    EvsEvent e;
    CHECK(evs_events_get(back, 1, &e) == EVS_STATUS_OK);
    CHECK(e.x == 3 && e.y == 3 && e.t == 20 && e.p == -1);

    int32_t acc[16];
    CHECK(evs_accumulate(back, 0, 30, false, acc, 16) == EVS_STATUS_OK);
    CHECK(acc[0] == 1 && acc[15] == -1);

    CHECK(evs_events_parse_binary((const uint8_t *)"XXXX", 4, &s) == EVS_STATUS_FORMAT);
    CHECK(evs_last_error_message() != NULL);

    double px[256];
    for (int i = 0; i < 256; i++) px[i] = (double)(i % 200);
    EvsFrame *f = NULL;
    CHECK(evs_frame_new(16, 16, 1, px, 256, 0, &f) == EVS_STATUS_OK);
    double v = 0.0;
    CHECK(evs_ssim(f, f, &v) == EVS_STATUS_OK && v == 1.0);

    EvsFeaturePair pairs[2] = {{0, 0, 1, 1}, {2, 0, 5, 1}};
    EvsRegistration reg;
    CHECK(evs_registration_estimate(pairs, &reg) == EVS_STATUS_OK);
    CHECK(reg.r == 2.0);

    evs_frame_free(f);
    evs_events_free(back);
    evs_events_free(s);
    printf("ok\n");
    return 0;
}
