// import fake.Thing;
import a.b.C; // note
/* import x.y; */
 import  com.google.common.collect.ImmutableList ;
